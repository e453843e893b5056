//! One PASS/FAIL line per headline requirement; exits non-zero if any
//! failed. Built without the test harness so the lines always show.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use syrec::circuit::{permutation, Circuit, Line};
use syrec::frontend::BinOp;
use syrec::gates::{
    build_add_assign, build_binary_onto, build_decrement, build_increment, build_sub_assign, ControlContext,
    HelperPool, Operand,
};
use syrec::real::{emit_real, parse_real};
use syrec::sim::{check_reversible, run, run_wide};
use syrec::synth::simulate_program;
use syrec::{embed_inputs, execute, interpret, invert_statements, SynthesisMode, ALU_SOURCE};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn alu_line_counts() -> Check {
    let p = build(ALU_SOURCE);
    let line = synth(&p, SynthesisMode::LineAware).stats;
    let cost = synth(&p, SynthesisMode::CostAware).stats;
    ensure(line.line_count == 7 && line.constant_line_count == 0, || {
        format!("line-aware: {} lines, {} constant", line.line_count, line.constant_line_count)
    })?;
    ensure(cost.line_count == 11 && cost.constant_line_count == 4, || {
        format!("cost-aware: {} lines, {} constant", cost.line_count, cost.constant_line_count)
    })
}

fn alu_trade_off() -> Check {
    let p = build(ALU_SOURCE);
    let line = synth(&p, SynthesisMode::LineAware).stats;
    let cost = synth(&p, SynthesisMode::CostAware).stats;
    ensure(cost.gate_count < line.gate_count && cost.quantum_cost < line.quantum_cost, || {
        format!(
            "gates {} vs {}, quantum cost {} vs {}",
            cost.gate_count, line.gate_count, cost.quantum_cost, line.quantum_cost
        )
    })
}

fn alu_end_to_end() -> Check {
    let p = build(ALU_SOURCE);
    let sigs = inputs_of(&p);
    ensure(input_bits(&sigs) == 5, || format!("{} input bits", input_bits(&sigs)))?;
    for mode in MODES {
        let r = synth(&p, mode);
        for s in assignments(&sigs, 5, 0, 0) {
            let want = interpret(&p, &s).map_err(|e| e.to_string())?.final_state;
            let got = simulate_program(&r, &s).map_err(|e| e.to_string())?;
            ensure(got.get("x0") == want.get("x0"), || format!("{mode} on {s}: x0 {got} vs {want}"))?;
            if mode == SynthesisMode::LineAware {
                let word = embed_inputs(&r.binding, &s, r.circuit.line_count()).map_err(|e| e.to_string())?;
                let out = run_wide(&r.circuit, &word);
                for name in ["x1", "x2"] {
                    let b = r.binding.get(name).ok_or_else(|| format!("{name} has no lines"))?;
                    ensure(b.lines.iter().all(|&l| out.get(l) == word.get(l)), || {
                        format!("{name} not restored on {s}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn bijectivity() -> Check {
    let mut checked = 0;
    for (name, src) in corpus() {
        let p = build(&src);
        for mode in MODES {
            let c = synth(&p, mode).circuit;
            if c.line_count() > 12 {
                continue;
            }
            let collision = check_reversible(&c).map_err(|e| e.to_string())?;
            ensure(collision.is_none(), || format!("{name} {mode}: {collision:?}"))?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no circuit small enough".into())
}

fn inverse_interpreter() -> Check {
    for (name, src) in corpus() {
        let p = build(&src);
        let body = &p.entry().body;
        let mut round = body.clone();
        round.extend(invert_statements(body));
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let s = random_state(&p, &mut rng);
            let back = execute(&p, &round, &s).map_err(|e| format!("{name}: {e}"))?;
            ensure(back == s, || format!("{name}: {s} came back as {back}"))?;
        }
    }
    Ok(())
}

fn inverse_call_uncall() -> Check {
    let mut checked = 0;
    for (file, p, module) in corpus_modules() {
        let Some(src) = call_uncall_source(&p, &module) else { continue };
        let wrapped = build(&src);
        for mode in MODES {
            let c = synth(&wrapped, mode).circuit;
            if c.line_count() > 12 {
                continue;
            }
            let perm = permutation(&c).map_err(|e| e.to_string())?;
            ensure(perm.iter().enumerate().all(|(x, &y)| x as u64 == y), || {
                format!("{file}/{module} {mode}: not the identity")
            })?;
            checked += 1;
        }
    }
    ensure(checked >= 10, || format!("only {checked} circuits checked"))
}

fn contexts() -> [Vec<usize>; 3] {
    [vec![], vec![0], vec![0, 1]]
}

/// `ctx` lines, then `regs` registers of `w` lines.
fn registers(ctx: &[usize], w: usize, regs: usize) -> (Circuit, ControlContext, Vec<Vec<usize>>) {
    let k = ctx.len();
    let c = Circuit::with_lines(k + w * regs);
    let r = (0..regs).map(|i| (k + i * w..k + (i + 1) * w).collect()).collect();
    (c, ControlContext::from_lines(ctx.iter().copied()), r)
}

fn identity(c: &Circuit) -> bool {
    (0..1u64 << c.line_count()).all(|x| run(c, x) == x)
}

fn inverse_blocks() -> Check {
    for w in 1..=3 {
        for ctx in contexts() {
            let (mut c, cc, r) = registers(&ctx, w, 2);
            let src = Operand::Lines(r[1].clone());
            build_add_assign(&mut c, &cc, &r[0], &src).map_err(|e| e.to_string())?;
            build_sub_assign(&mut c, &cc, &r[0], &src).map_err(|e| e.to_string())?;
            ensure(identity(&c), || format!("add then sub, w={w} ctx={ctx:?}"))?;
            let (mut c, cc, r) = registers(&ctx, w, 1);
            build_increment(&mut c, &cc, &r[0]).map_err(|e| e.to_string())?;
            build_decrement(&mut c, &cc, &r[0]).map_err(|e| e.to_string())?;
            ensure(identity(&c), || format!("inc then dec, w={w} ctx={ctx:?}"))?;
        }
    }
    Ok(())
}

fn bits(x: u64, lines: &[usize]) -> u64 {
    lines.iter().enumerate().fold(0, |v, (i, &l)| v | (x >> l & 1) << i)
}

fn set_bits(x: u64, lines: &[usize], v: u64) -> u64 {
    lines.iter().enumerate().fold(x, |s, (i, &l)| (s & !(1 << l)) | (v >> i & 1) << l)
}

/// Checks `c` on every state of its first `fixed` lines: `expect` when
/// every control is set, a fixed point otherwise, helpers clean.
fn block_matches(c: &Circuit, fixed: usize, ctx: &[usize], what: &str, expect: impl Fn(u64) -> Option<u64>) -> Check {
    let on: u64 = ctx.iter().map(|&l| 1u64 << l).sum();
    for x in 0..1u64 << fixed {
        let y = run(c, x);
        ensure(y >> fixed == 0, || format!("{what}: helper dirty on {x:#b}"))?;
        if x & on != on {
            ensure(y == x, || format!("{what}: gated off but {x:#b} -> {y:#b}"))?;
        } else if let Some(e) = expect(x) {
            ensure(y == e, || format!("{what}: {x:#b} -> {y:#b}, want {e:#b}"))?;
        }
    }
    Ok(())
}

fn truth(op: BinOp, a: u64, b: u64, w: u32) -> u64 {
    let modulus = 1u64 << w;
    match op {
        BinOp::Add => (a + b) % modulus,
        BinOp::Sub => (a + modulus - b) % modulus,
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Lt => (a < b) as u64,
        BinOp::Gt => (a > b) as u64,
        BinOp::Le => (a <= b) as u64,
        BinOp::Ge => (a >= b) as u64,
        BinOp::Eq => (a == b) as u64,
        BinOp::Ne => (a != b) as u64,
        _ => unreachable!(),
    }
}

fn block_oracle() -> Check {
    let m = |w: usize| (1u64 << w) - 1;
    for w in 1..=3 {
        for ctx in contexts() {
            // In-place adder and subtractor.
            for (name, add) in [("+=", true), ("-=", false)] {
                let (mut c, cc, r) = registers(&ctx, w, 2);
                let src = Operand::Lines(r[1].clone());
                if add {
                    build_add_assign(&mut c, &cc, &r[0], &src)
                } else {
                    build_sub_assign(&mut c, &cc, &r[0], &src)
                }
                .map_err(|e| e.to_string())?;
                let fixed = c.line_count();
                block_matches(&c, fixed, &ctx, &format!("{name} w={w} ctx={ctx:?}"), |x| {
                    let (t, s) = (bits(x, &r[0]), bits(x, &r[1]));
                    let v = if add { t + s } else { t + (1 << w) - s };
                    Some(set_bits(x, &r[0], v & m(w)))
                })?;
            }
            // Out-of-place arithmetic, comparators and bitwise operators.
            for op in [
                BinOp::Add,
                BinOp::Sub,
                BinOp::And,
                BinOp::Or,
                BinOp::Xor,
                BinOp::Lt,
                BinOp::Gt,
                BinOp::Le,
                BinOp::Ge,
                BinOp::Eq,
                BinOp::Ne,
            ] {
                let (mut c, cc, r) = registers(&ctx, w, 2);
                let rw = if op.yields_bit() { 1 } else { w };
                let res: Vec<usize> = (0..rw).map(|i| c.add_line(Line::constant(format!("r{i}")))).collect();
                let fixed = c.line_count();
                let mut pool = HelperPool::new(64);
                build_binary_onto(&mut c, &cc, op, &Operand::Lines(r[0].clone()), &Operand::Lines(r[1].clone()), &res, &mut pool)
                    .map_err(|e| e.to_string())?;
                let fresh = matches!(op, BinOp::Add | BinOp::Sub);
                block_matches(&c, fixed, &ctx, &format!("{} w={w} ctx={ctx:?}", op.symbol()), |x| {
                    let prior = bits(x, &res);
                    if fresh && prior != 0 {
                        return None;
                    }
                    let v = truth(op, bits(x, &r[0]), bits(x, &r[1]), w as u32);
                    Some(set_bits(x, &res, prior ^ v))
                })?;
            }
        }
    }
    Ok(())
}

fn format_stability() -> Check {
    for (name, src) in corpus() {
        let p = build(&src);
        for mode in MODES {
            let c = synth(&p, mode).circuit;
            let text = emit_real(&c);
            let back = parse_real(&text).map_err(|e| format!("{name} {mode}: {e}"))?;
            ensure(emit_real(&back) == text, || format!("{name} {mode}: text changed"))?;
            if c.line_count() <= 12 {
                let (a, b) = (permutation(&c), permutation(&back));
                ensure(a.is_ok() && a.ok() == b.ok(), || format!("{name} {mode}: permutation changed"))?;
            }
        }
    }
    Ok(())
}

fn determinism() -> Check {
    let mut sources = corpus();
    sources.push(("alu (builtin)".into(), ALU_SOURCE.into()));
    for (name, src) in sources {
        for mode in MODES {
            let a = emit_real(&synth(&build(&src), mode).circuit);
            let b = emit_real(&synth(&build(&src), mode).circuit);
            ensure(a == b, || format!("{name} {mode}: outputs differ"))?;
        }
    }
    Ok(())
}

fn main() {
    let checks: [Criterion; 10] = [
        ("ALU line counts", alu_line_counts),
        ("trade-off ordering on the ALU", alu_trade_off),
        ("end-to-end ALU equivalence", alu_end_to_end),
        ("bijectivity of corpus circuits", bijectivity),
        ("inverse (a): body then inverse body", inverse_interpreter),
        ("inverse (b): call then uncall", inverse_call_uncall),
        ("inverse (c): add/sub and inc/dec blocks", inverse_blocks),
        ("block oracle equivalence", block_oracle),
        ("format stability", format_stability),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS {name} ({ms} ms)"),
            Err(why) => {
                println!("FAIL {name} ({ms} ms): {why}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", checks.len());
    } else {
        println!("acceptance: {} failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
