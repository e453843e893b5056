//! RevLib `.real` reading and writing, and the statistics JSON.
//!
//! Line labels such as `x1.0` are not valid `.real` identifiers, so every
//! label, input name and output name is written as a sanitized token. A
//! `# map token=original` comment precedes the header for each token that
//! differs from its original text; the parser uses these comments to
//! restore the exact names.

use std::collections::HashMap;

use serde_json::json;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitStats, Gate, GateKind, Line};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealError {
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: unsupported directive {directive}")]
    Unsupported { line: usize, directive: String },
    #[error("line {line}: unknown gate mnemonic '{mnemonic}'")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("line {line}: malformed gate: {message}")]
    MalformedGate { line: usize, message: String },
    #[error("line {line}: duplicate line in gate")]
    DuplicateLine { line: usize },
    #[error("line {line}: label mismatch: {message}")]
    LabelMismatch { line: usize, message: String },
    #[error("line {line}: unterminated gate section")]
    Unterminated { line: usize },
}

fn sanitize(s: &str) -> String {
    if s.is_empty() {
        return "_".to_string();
    }
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Assigns tokens to names; a token always stands for a single name.
#[derive(Default)]
struct Tokens {
    by_token: HashMap<String, String>,
    by_name: HashMap<String, String>,
    mapped: Vec<(String, String)>,
}

impl Tokens {
    fn fresh(&mut self, name: &str) -> String {
        let base = sanitize(name);
        let mut token = base.clone();
        let mut k = 1;
        while self.by_token.contains_key(&token) || token == "-" {
            token = format!("{base}_{k}");
            k += 1;
        }
        self.by_token.insert(token.clone(), name.to_string());
        if token != name {
            self.mapped.push((token.clone(), name.to_string()));
        }
        token
    }

    /// A token unique to this occurrence.
    fn unique(&mut self, name: &str) -> String {
        let t = self.fresh(name);
        self.by_name.entry(name.to_string()).or_insert_with(|| t.clone());
        t
    }

    /// The token already used for `name`, or a new one.
    fn shared(&mut self, name: &str) -> String {
        if let Some(t) = self.by_name.get(name) {
            return t.clone();
        }
        self.unique(name)
    }
}

pub fn emit_real(circuit: &Circuit) -> String {
    let mut tokens = Tokens::default();
    let vars: Vec<String> = circuit.lines().iter().map(|l| tokens.unique(&l.label)).collect();
    let mut names = |n: &Option<String>| match n {
        Some(n) => tokens.shared(n),
        None => "-".to_string(),
    };
    let inputs: Vec<String> = circuit.lines().iter().map(|l| names(&l.input)).collect();
    let outputs: Vec<String> = circuit.lines().iter().map(|l| names(&l.output)).collect();

    let mut out = String::new();
    for (token, name) in &tokens.mapped {
        out.push_str(&format!("# map {token}={name}\n"));
    }
    out.push_str(".version 2.0\n");
    out.push_str(&format!(".numvars {}\n", circuit.line_count()));
    out.push_str(&format!(".variables {}\n", vars.join(" ")));
    out.push_str(&format!(".inputs {}\n", inputs.join(" ")));
    out.push_str(&format!(".outputs {}\n", outputs.join(" ")));
    let flags = |f: &dyn Fn(&Line) -> bool, on: char| -> String {
        circuit.lines().iter().map(|l| if f(l) { on } else { '-' }).collect()
    };
    out.push_str(&format!(".constants {}\n", flags(&|l| l.constant, '0')));
    out.push_str(&format!(".garbage {}\n", flags(&|l| l.garbage, '1')));
    out.push_str(".begin\n");
    for g in circuit.gates() {
        let (prefix, k) = match g.kind {
            GateKind::Mct => ('t', g.controls.len() + 1),
            GateKind::Mcf => ('f', g.controls.len() + 2),
        };
        out.push_str(&format!("{prefix}{k}"));
        for l in g.lines() {
            out.push(' ');
            out.push_str(&vars[l]);
        }
        out.push('\n');
    }
    out.push_str(".end\n");
    out
}

#[derive(Default)]
struct Header {
    numvars: Option<usize>,
    variables: Option<Vec<String>>,
    inputs: Option<Vec<String>>,
    outputs: Option<Vec<String>>,
    constants: Option<String>,
    garbage: Option<String>,
}

pub fn parse_real(text: &str) -> Result<Circuit, RealError> {
    let mut map: HashMap<String, String> = HashMap::new();
    let mut header = Header::default();
    let mut gates: Vec<(usize, &str)> = Vec::new();
    let mut state = 0; // 0 header, 1 gates, 2 after .end
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        last_line = n;
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(entry) = rest.trim_start().strip_prefix("map ") {
                let (tok, name) = entry.split_once('=').ok_or_else(|| RealError::MalformedHeader {
                    line: n,
                    message: "map comment without '='".into(),
                })?;
                map.insert(tok.trim().to_string(), name.to_string());
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match state {
            0 => {
                let (directive, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                let rest = rest.trim();
                let words = || rest.split_whitespace().map(str::to_string).collect::<Vec<_>>();
                let bad = |message: &str| RealError::MalformedHeader {
                    line: n,
                    message: message.to_string(),
                };
                match directive {
                    ".version" => {}
                    ".numvars" => header.numvars = Some(rest.parse().map_err(|_| bad("invalid .numvars"))?),
                    ".variables" => header.variables = Some(words()),
                    ".inputs" => header.inputs = Some(words()),
                    ".outputs" => header.outputs = Some(words()),
                    ".constants" => header.constants = Some(rest.to_string()),
                    ".garbage" => header.garbage = Some(rest.to_string()),
                    ".begin" => state = 1,
                    ".module" | ".inputbus" | ".outputbus" | ".define" | ".state" => {
                        return Err(RealError::Unsupported {
                            line: n,
                            directive: directive.to_string(),
                        })
                    }
                    ".end" => return Err(bad(".end before .begin")),
                    other => return Err(bad(&format!("unexpected '{other}'"))),
                }
            }
            1 => {
                if line == ".end" {
                    state = 2;
                } else if line.starts_with('.') {
                    return Err(RealError::MalformedGate {
                        line: n,
                        message: format!("directive '{line}' inside the gate section"),
                    });
                } else {
                    gates.push((n, line));
                }
            }
            _ => {
                return Err(RealError::MalformedHeader {
                    line: n,
                    message: "content after .end".into(),
                })
            }
        }
    }
    match state {
        0 => {
            return Err(RealError::MalformedHeader {
                line: last_line,
                message: "missing .begin".into(),
            })
        }
        1 => return Err(RealError::Unterminated { line: last_line }),
        _ => {}
    }

    let missing = |what: &str| RealError::MalformedHeader {
        line: 1,
        message: format!("missing {what}"),
    };
    let numvars = header.numvars.ok_or_else(|| missing(".numvars"))?;
    let vars = header.variables.ok_or_else(|| missing(".variables"))?;
    if vars.len() != numvars {
        return Err(RealError::LabelMismatch {
            line: 1,
            message: format!(".variables lists {} names for {numvars} lines", vars.len()),
        });
    }
    let name = |t: &str| map.get(t).cloned().unwrap_or_else(|| t.to_string());
    let per_line = |v: Option<Vec<String>>, what: &str| -> Result<Vec<Option<String>>, RealError> {
        let v = v.unwrap_or_else(|| vars.clone());
        if v.len() != numvars {
            return Err(RealError::LabelMismatch {
                line: 1,
                message: format!("{what} lists {} names for {numvars} lines", v.len()),
            });
        }
        Ok(v.iter().map(|t| (t != "-").then(|| name(t))).collect())
    };
    let inputs = per_line(header.inputs, ".inputs")?;
    let outputs = per_line(header.outputs, ".outputs")?;
    let flags = |s: Option<String>, on: char, what: &str| -> Result<Vec<bool>, RealError> {
        let s = s.unwrap_or_else(|| "-".repeat(numvars));
        if s.chars().count() != numvars || s.chars().any(|c| c != on && c != '-') {
            return Err(RealError::MalformedHeader {
                line: 1,
                message: format!("{what} must have {numvars} characters from '{on}-'"),
            });
        }
        Ok(s.chars().map(|c| c == on).collect())
    };
    let constants = flags(header.constants, '0', ".constants")?;
    let garbage = flags(header.garbage, '1', ".garbage")?;

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut lines = Vec::with_capacity(numvars);
    for (i, tok) in vars.iter().enumerate() {
        if index.insert(tok.as_str(), i).is_some() {
            return Err(RealError::LabelMismatch {
                line: 1,
                message: format!("variable '{tok}' declared twice"),
            });
        }
        lines.push(Line {
            label: name(tok),
            constant: constants[i],
            garbage: garbage[i],
            input: inputs[i].clone(),
            output: outputs[i].clone(),
        });
    }

    let mut circuit = Circuit::from_parts(lines, Vec::new()).expect("no gates yet");
    for (n, text) in gates {
        let mut parts = text.split_whitespace();
        let mnemonic = parts.next().unwrap_or_default();
        let operands: Vec<&str> = parts.collect();
        let (kind, arity) = parse_mnemonic(mnemonic).ok_or_else(|| RealError::UnknownMnemonic {
            line: n,
            mnemonic: mnemonic.to_string(),
        })?;
        if operands.len() != arity {
            return Err(RealError::MalformedGate {
                line: n,
                message: format!("{mnemonic} expects {arity} lines, found {}", operands.len()),
            });
        }
        let mut ids = Vec::with_capacity(arity);
        for op in &operands {
            let id = *index.get(op).ok_or_else(|| RealError::LabelMismatch {
                line: n,
                message: format!("unknown variable '{op}'"),
            })?;
            if ids.contains(&id) {
                return Err(RealError::DuplicateLine { line: n });
            }
            ids.push(id);
        }
        let gate = match kind {
            GateKind::Mct => {
                let t = ids.pop().expect("arity >= 1");
                Gate::mct(ids, t)
            }
            GateKind::Mcf => {
                let b = ids.pop().expect("arity >= 2");
                let a = ids.pop().expect("arity >= 2");
                Gate::mcf(ids, a, b)
            }
        };
        circuit.append_gate(gate).map_err(|e| RealError::MalformedGate {
            line: n,
            message: e.to_string(),
        })?;
    }
    Ok(circuit)
}

fn parse_mnemonic(m: &str) -> Option<(GateKind, usize)> {
    let kind = match m.chars().next()? {
        't' => GateKind::Mct,
        'f' => GateKind::Mcf,
        _ => return None,
    };
    let k: usize = m[1..].parse().ok()?;
    let min = if kind == GateKind::Mct { 1 } else { 2 };
    (k >= min).then_some((kind, k))
}

/// Flat statistics object with a fixed key order.
pub fn emit_stats(stats: &CircuitStats, mode: &str, program: &str) -> String {
    json!({
        "program": program,
        "mode": mode,
        "lines": stats.line_count,
        "constants": stats.constant_line_count,
        "garbage": stats.garbage_count,
        "gates": stats.gate_count,
        "quantumCost": stats.quantum_cost,
    })
    .to_string()
}
