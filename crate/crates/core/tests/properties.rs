//! Randomized invariants: circuits, the `.real` format, and synthesis of
//! generated programs.

mod common;

use common::*;
use proptest::prelude::*;
use syrec::circuit::{reverse_circuit, statistics, Circuit, Gate, Line, QuantumCost};
use syrec::real::{emit_real, parse_real};
use syrec::sim::{apply_gate, check_reversible, run};
use syrec::synth::{embed_inputs, extract_outputs, simulate_program};
use syrec::{interpret, SignalState};

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let mct = (0..n, proptest::collection::vec(0..n, 0..4)).prop_filter_map("control is target", |(t, cs)| {
        (!cs.contains(&t)).then(|| Gate::mct(cs, t))
    });
    let mcf = (0..n, 0..n, proptest::collection::vec(0..n, 0..3)).prop_filter_map("overlap", |(a, b, cs)| {
        (a != b && !cs.contains(&a) && !cs.contains(&b)).then(|| Gate::mcf(cs, a, b))
    });
    if n < 2 {
        mct.boxed()
    } else {
        prop_oneof![3 => mct, 1 => mcf].boxed()
    }
}

fn circuit(max_lines: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_lines).prop_flat_map(|n| {
        let lines = proptest::collection::vec(
            ("[a-z][a-z0-9_.]{0,4}", any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>()),
            n,
        );
        (lines, proptest::collection::vec(gate(n), 0..12)).prop_map(|(ls, gs)| {
            let lines = ls
                .into_iter()
                .map(|(label, constant, garbage, has_in, has_out)| Line {
                    input: has_in.then(|| label.clone()),
                    output: has_out.then(|| format!("{label}'")),
                    label,
                    constant,
                    garbage,
                })
                .collect();
            Circuit::from_parts(lines, gs).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn gates_are_self_inverse(g in gate(8), w in 0u64..256) {
        prop_assert_eq!(apply_gate(&g, apply_gate(&g, w)), w);
    }

    #[test]
    fn reversed_circuit_undoes_the_circuit(c in circuit(8), w in 0u64..256) {
        let w = w & ((1 << c.line_count()) - 1);
        prop_assert_eq!(run(&reverse_circuit(&c), run(&c, w)), w);
    }

    #[test]
    fn circuits_are_bijections(c in circuit(8)) {
        prop_assert_eq!(check_reversible(&c).unwrap(), None);
    }

    #[test]
    fn statistics_are_additive(a in circuit(6), extra in proptest::collection::vec(gate(6), 0..8)) {
        let n = a.line_count();
        let extra: Vec<Gate> = extra.into_iter().filter(|g| g.validate(n).is_ok()).collect();
        let b = Circuit::from_parts(a.lines().to_vec(), extra).unwrap();
        let mut ab = a.clone();
        ab.append_circuit(&b).unwrap();
        prop_assert_eq!(&ab.gates()[..a.gate_count()], a.gates());
        let (sa, sb, sab) = (statistics(&a, &QuantumCost), statistics(&b, &QuantumCost), statistics(&ab, &QuantumCost));
        prop_assert_eq!(sab.quantum_cost, sa.quantum_cost + sb.quantum_cost);
        prop_assert_eq!(sab.gate_count, sa.gate_count + sb.gate_count);
    }

    #[test]
    fn real_round_trip(c in circuit(8)) {
        let text = emit_real(&c);
        let back = parse_real(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(emit_real(&back), text);
    }

    #[test]
    fn embed_then_extract(op in 0u64..2, x0 in 0u64..4, x1 in 0u64..4, x2 in 0u64..4) {
        let r = synth(&build(syrec::ALU_SOURCE), syrec::SynthesisMode::CostAware);
        let s: SignalState = [("op", op), ("x0", x0), ("x1", x1), ("x2", x2)].into_iter().collect();
        let word = embed_inputs(&r.binding, &s, r.circuit.line_count()).unwrap();
        prop_assert_eq!(extract_outputs(&r.binding, &word), s);
    }
}

/// Random programs over `inout a(w), inout b(w), in c(w), in d(1)` with a
/// wire `t(w)` and a helper module.
#[derive(Clone, Debug)]
struct Gen {
    w: u32,
}

const WRITABLE: [&str; 3] = ["a", "b", "t"];

impl Gen {
    /// An expression that does not read `target`.
    fn expr(&self, target: &'static str, depth: u32) -> BoxedStrategy<String> {
        let w = self.w;
        let readable: Vec<&str> = ["c"].into_iter().chain(WRITABLE).filter(|s| *s != target).collect();
        let leaf = prop_oneof![
            2 => prop::sample::select(readable).prop_map(str::to_string),
            1 => (0..1u64 << w).prop_map(|v| v.to_string()),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let sub = self.expr(target, depth - 1);
        let bin = (sub.clone(), prop::sample::select(vec!["+", "-", "^", "&", "|"]), sub.clone())
            .prop_map(|(l, op, r)| format!("({l} {op} {r})"));
        let shift = (sub, prop::sample::select(vec!["<<", ">>"]), 0..=w).prop_map(|(e, op, k)| format!("({e} {op} {k})"));
        prop_oneof![2 => leaf, 3 => bin, 1 => shift].boxed()
    }

    /// A 1-bit condition reading only `reads`.
    fn cond(&self, reads: Vec<&'static str>) -> BoxedStrategy<String> {
        let w = self.w;
        let sig = prop::sample::select(reads);
        prop_oneof![
            Just("d".to_string()),
            (sig.clone(), prop::sample::select(vec!["<", ">", "=", "!=", "<=", ">="]), 0..1u64 << w)
                .prop_map(|(s, op, v)| format!("({s} {op} {v})")),
            (sig.clone(), 0..w).prop_map(|(s, i)| format!("{s}.{i}")),
            (sig.clone(), sig).prop_map(|(x, y)| format!("(({x} = 1) || ({y}.0 < d))")),
            Just("(d && (c != 0))".to_string()),
        ]
        .boxed()
    }

    /// A statement writing only signals in `targets`.
    fn stmt(&self, targets: Vec<&'static str>, depth: u32) -> BoxedStrategy<String> {
        let target = prop::sample::select(targets.clone());
        let g = self.clone();
        let assign = target
            .clone()
            .prop_flat_map(move |t| (Just(t), prop::sample::select(vec!["^=", "+=", "-="]), g.expr(t, 2)))
            .prop_map(|(t, op, e)| format!("{t} {op} {e}"));
        let unary = (prop::sample::select(vec!["++=", "--=", "~="]), target.clone()).prop_map(|(op, t)| format!("{op} {t}"));
        let w = self.w;
        let bit = (target.clone(), 0..w, 0..w, 0..w, prop::sample::select(vec!["&", "|", "^", "&&", "||"]))
            .prop_map(|(t, i, j, k, op)| format!("{t}.{i} ^= (c.{j} {op} {}.{k})", if t == "a" { "b" } else { "a" }));
        let call = (
            target.clone(),
            prop::sample::select(vec!["c", "a", "b", "t"]),
            prop::sample::select(vec!["call", "uncall"]),
        )
            .prop_filter_map("same argument twice", |(x, y, kw)| (x != y).then(|| format!("{kw} bump({x}, {y})")));
        let mut simple = vec![(4, assign.boxed()), (2, unary.boxed()), (1, bit.boxed()), (1, call.boxed())];
        if targets.len() > 1 {
            let pair = (target.clone(), target).prop_filter_map("swap with itself", |(x, y)| (x != y).then(|| format!("{x} <=> {y}")));
            simple.push((1, pair.boxed()));
        }
        let simple = proptest::strategy::Union::new_weighted(simple);
        if depth == 0 {
            return simple.boxed();
        }
        // Either any targets under a condition on inputs, or a condition on
        // one signal while the branches leave it alone.
        let g = self.clone();
        let plain = (g.cond(vec!["c"]), g.body(targets.clone(), depth - 1), g.body(targets.clone(), depth - 1));
        let branch = if targets.len() > 1 {
            let g = self.clone();
            let all = targets.clone();
            let split = prop::sample::select(targets).prop_flat_map(move |held| {
                let rest: Vec<&'static str> = all.iter().copied().filter(|s| *s != held).collect();
                (g.cond(vec![held, "c"]), g.body(rest.clone(), depth - 1), g.body(rest, depth - 1))
            });
            prop_oneof![plain, split].boxed()
        } else {
            plain.boxed()
        };
        let branch = branch.prop_map(|(c, t, e)| format!("if {c} then\n{t}\nelse\n{e}\nfi {c}"));
        prop_oneof![3 => simple, 1 => branch].boxed()
    }

    fn body(&self, targets: Vec<&'static str>, depth: u32) -> BoxedStrategy<String> {
        proptest::collection::vec(self.stmt(targets, depth), 1..4).prop_map(|s| s.join(";\n")).boxed()
    }
}

fn program() -> impl Strategy<Value = String> {
    (1u32..=3).prop_flat_map(|w| {
        Gen { w }.body(WRITABLE.to_vec(), 2).prop_map(move |b| {
            format!(
                "module bump(inout x({w}), in y({w}))\n  x += y;\n  ++= x\n\n\
                 module main(inout a({w}), inout b({w}), in c({w}), in d(1))\n  wire t({w})\n{b}"
            )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generated_programs_synthesize_correctly(src in program()) {
        let p = match syrec::compile(&src, &syrec::ElabSettings::default()) {
            Ok(p) => p,
            Err(d) => panic!("generator produced invalid source:\n{src}\n{}", d.render("gen")),
        };
        let sigs = inputs_of(&p);
        let outs = outputs_of(&p);
        let states = assignments(&sigs, 10, 0, 0);
        let mut lines = Vec::new();
        for mode in MODES {
            let r = synth(&p, mode);
            lines.push(r.stats.line_count);
            for s in &states {
                let want = interpret(&p, s).unwrap().final_state.select(outs.iter().map(String::as_str));
                let got = simulate_program(&r, s).unwrap();
                prop_assert_eq!(&got, &want, "{} on {}\n{}", mode, s, src);
            }
            if r.circuit.line_count() <= 12 {
                prop_assert_eq!(check_reversible(&r.circuit).unwrap(), None);
            }
        }
        prop_assert!(lines[1] <= lines[0], "line-aware used {} lines, cost-aware {}\n{}", lines[1], lines[0], src);
    }
}
