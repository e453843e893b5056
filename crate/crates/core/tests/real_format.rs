//! `.real` output of synthesized corpus circuits: round trips and stability.

mod common;

use std::collections::HashMap;

use common::*;
use syrec::circuit::{permutation, statistics, Circuit, QuantumCost};
use syrec::real::{emit_real, emit_stats, parse_real};

fn corpus_circuits() -> Vec<(String, Circuit)> {
    let mut out = Vec::new();
    for (name, src) in corpus() {
        let p = build(&src);
        for mode in MODES {
            out.push((format!("{name} {mode}"), synth(&p, mode).circuit));
        }
    }
    out
}

#[test]
fn emit_parse_emit_is_byte_identical() {
    for (name, c) in corpus_circuits() {
        let text = emit_real(&c);
        let back = parse_real(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(back, c, "{name}: structure changed");
        assert_eq!(emit_real(&back), text, "{name}: text changed");
    }
}

#[test]
fn parse_back_keeps_the_permutation() {
    let mut checked = 0;
    for (name, c) in corpus_circuits() {
        if c.line_count() > 12 {
            continue;
        }
        let back = parse_real(&emit_real(&c)).unwrap();
        assert_eq!(permutation(&back).unwrap(), permutation(&c).unwrap(), "{name}");
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn synthesis_is_deterministic() {
    for (name, src) in corpus() {
        for mode in MODES {
            let a = emit_real(&synth(&build(&src), mode).circuit);
            let b = emit_real(&synth(&build(&src), mode).circuit);
            assert_eq!(a, b, "{name} {mode}");
        }
    }
}

#[test]
fn distinct_circuits_have_distinct_texts() {
    let mut seen: HashMap<String, (String, Circuit)> = HashMap::new();
    for (name, c) in corpus_circuits() {
        let text = emit_real(&c);
        if let Some((other, oc)) = seen.get(&text) {
            assert_eq!(oc, &c, "{name} and {other} print the same");
        }
        seen.insert(text, (name, c));
    }
}

#[test]
fn alu_headers() {
    let p = build(syrec::ALU_SOURCE);
    let cost = emit_real(&synth(&p, syrec::SynthesisMode::CostAware).circuit);
    assert!(cost.contains("\n.numvars 11\n"));
    // Signal lines first, then the four helper constants.
    assert!(cost.contains("\n.constants -------0000\n"));
    assert!(cost.contains("\n.variables op_0 x0_0 x0_1 x1_0 x1_1 x2_0 x2_1 const_0 const_0_1 const_0_2 const_0_3\n"));
    assert!(cost.contains("# map x1_0=x1.0\n"));
    let line = emit_real(&synth(&p, syrec::SynthesisMode::LineAware).circuit);
    assert!(line.contains("\n.numvars 7\n"));
    assert!(line.contains("\n.constants -------\n"));
}

#[test]
fn stats_json() {
    let p = build(syrec::ALU_SOURCE);
    let r = synth(&p, syrec::SynthesisMode::LineAware);
    let json = emit_stats(&r.stats, "line-aware", &r.program);
    assert!(json.starts_with(r#"{"program":"alu","mode":"line-aware","lines":7,"constants":0,"garbage":0,"#));
    let r = synth(&p, syrec::SynthesisMode::CostAware);
    let json = emit_stats(&r.stats, "cost-aware", &r.program);
    assert!(json.contains(r#""lines":11,"constants":4,"#));
    let empty = statistics(&Circuit::new(), &QuantumCost);
    let json: serde_json::Value = serde_json::from_str(&emit_stats(&empty, "cost-aware", "e")).unwrap();
    assert_eq!((json["lines"].as_u64(), json["gates"].as_u64(), json["quantumCost"].as_u64()), (Some(0), Some(0), Some(0)));
}

#[test]
fn parse_errors() {
    let head = ".version 2.0\n.numvars 2\n.variables a b\n.inputs a b\n.outputs a b\n.constants --\n.garbage --\n.begin\n";
    let e = parse_real(&format!("{head}t2 a b\n")).unwrap_err();
    assert!(e.to_string().contains("unterminated gate section"), "{e}");
    let e = parse_real(&format!("{head}t2 a a\n.end\n")).unwrap_err();
    assert!(e.to_string().contains("duplicate line in gate"), "{e}");
    let e = parse_real(&format!("{head}q2 a b\n.end\n")).unwrap_err();
    assert!(e.to_string().contains("line 9"), "{e}");
    let e = parse_real(&format!("{head}t2 a z\n.end\n")).unwrap_err();
    assert!(e.to_string().contains("line 9"), "{e}");
    assert!(parse_real(".version 2.0\n.module m\n").is_err());
    assert!(parse_real(&format!("{head}t2 a b\n.end\n")).is_ok());
}
