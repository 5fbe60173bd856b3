//! Line-oriented protocol text format: parser and serializer.
//!
//! ```text
//! protocol <name>
//! inputs: <symbol> -> <state> [, ...]
//! outputs: <state> -> <0|1|symbol> [, ...] [; default -> <symbol>]
//! rules:
//!   [sym:] <stateA> <stateB> -> <stateC> <stateD>
//! ```
//!
//! Comments start with `#`. States and symbols are bare identifiers
//! (`[A-Za-z0-9_]+`); generators write tuple states like `(l, -1)` as `l_m1`.
//!
//! The explicit `outputs:` entries declare the state set, in order. When a
//! `default -> y` clause is present, states that appear only in `inputs:`
//! targets or in rules are implicitly declared with output `y` (appended in
//! first-reference order); without it, referencing an unlisted state is an
//! error. A `sym:` rule prefix emits both orientations of the rule, mirroring
//! unordered pair notation. Serialization always lists every state explicitly
//! and only effective transitions, so parse(serialize(p)) reproduces `p`'s
//! states, input map, output map and effective rule set exactly.

use thiserror::Error;

use crate::builtins::Builtin;
use crate::model::{ModelError, Protocol};

type NamedRule = ((String, String), (String, String));

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error(transparent)]
    Protocol(#[from] ModelError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn semantic(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Semantic {
        line,
        msg: msg.into(),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_identifier(line: usize, s: &str) -> Result<(), ParseError> {
    if is_identifier(s) {
        Ok(())
    } else {
        Err(syntax(line, format!("`{s}` is not a valid identifier")))
    }
}

/// Splits `lhs -> rhs`, requiring exactly one arrow.
fn split_arrow(line: usize, s: &str) -> Result<(&str, &str), ParseError> {
    let mut parts = s.splitn(2, "->");
    let lhs = parts.next().unwrap().trim();
    let rhs = parts
        .next()
        .ok_or_else(|| syntax(line, format!("expected `->` in `{s}`")))?
        .trim();
    if rhs.contains("->") {
        return Err(syntax(line, format!("multiple `->` in `{s}`")));
    }
    Ok((lhs, rhs))
}

pub fn parse_protocol(text: &str) -> Result<Protocol, ParseError> {
    // Section contents with their line numbers.
    let mut name: Option<String> = None;
    let mut inputs: Vec<(usize, String, String)> = Vec::new();
    let mut outputs: Vec<(usize, String, String)> = Vec::new();
    let mut default_output: Option<(usize, String)> = None;
    let mut rules: Vec<(usize, bool, [String; 4])> = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        Start,
        Inputs,
        Outputs,
        Rules,
    }
    let mut section = Section::Start;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match section {
            Section::Start => {
                let rest = content.strip_prefix("protocol").ok_or_else(|| {
                    syntax(line, "expected `protocol <name>` as the first declaration")
                })?;
                let n = rest.trim();
                check_identifier(line, n)?;
                name = Some(n.to_string());
                section = Section::Inputs;
            }
            Section::Inputs => {
                let rest = content
                    .strip_prefix("inputs:")
                    .ok_or_else(|| syntax(line, "expected `inputs:` declaration"))?
                    .trim();
                for entry in rest.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                    let (sym, state) = split_arrow(line, entry)?;
                    check_identifier(line, sym)?;
                    check_identifier(line, state)?;
                    inputs.push((line, sym.to_string(), state.to_string()));
                }
                section = Section::Outputs;
            }
            Section::Outputs => {
                let rest = content
                    .strip_prefix("outputs:")
                    .ok_or_else(|| syntax(line, "expected `outputs:` declaration"))?
                    .trim();
                let (entries, default) = match rest.split_once(';') {
                    Some((e, d)) => (e.trim(), Some(d.trim())),
                    None => (rest, None),
                };
                for entry in entries.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                    let (state, y) = split_arrow(line, entry)?;
                    check_identifier(line, state)?;
                    check_identifier(line, y)?;
                    outputs.push((line, state.to_string(), y.to_string()));
                }
                if let Some(d) = default {
                    let (kw, y) = split_arrow(line, d)?;
                    if kw != "default" {
                        return Err(syntax(line, format!("expected `default -> ...`, got `{kw}`")));
                    }
                    check_identifier(line, y)?;
                    default_output = Some((line, y.to_string()));
                }
                section = Section::Rules;
            }
            Section::Rules => {
                if rules.is_empty() && content == "rules:" {
                    continue;
                }
                if content == "rules:" {
                    return Err(syntax(line, "duplicate `rules:` section"));
                }
                let (symmetric, body) = match content.strip_prefix("sym:") {
                    Some(rest) => (true, rest.trim()),
                    None => (false, content),
                };
                let (lhs, rhs) = split_arrow(line, body)?;
                let l: Vec<&str> = lhs.split_whitespace().collect();
                let r: Vec<&str> = rhs.split_whitespace().collect();
                if l.len() != 2 || r.len() != 2 {
                    return Err(syntax(
                        line,
                        "rule must have the form `<a> <b> -> <c> <d>`",
                    ));
                }
                for t in l.iter().chain(r.iter()) {
                    check_identifier(line, t)?;
                }
                rules.push((
                    line,
                    symmetric,
                    [l[0].into(), l[1].into(), r[0].into(), r[1].into()],
                ));
            }
        }
    }

    let name = name.ok_or_else(|| syntax(text.lines().count() + 1, "missing `protocol` header"))?;
    if section == Section::Inputs || section == Section::Outputs {
        return Err(syntax(
            text.lines().count() + 1,
            "missing `inputs:`/`outputs:` declarations",
        ));
    }

    // Q, in declaration order: explicit outputs entries first.
    let mut states: Vec<String> = Vec::new();
    let mut output_map: Vec<(String, String)> = Vec::new();
    for (line, state, y) in &outputs {
        if states.contains(state) {
            return Err(semantic(*line, format!("state `{state}` declared twice")));
        }
        states.push(state.clone());
        output_map.push((state.clone(), y.clone()));
    }

    // Implicitly declared states, when a default output exists.
    let require_declared = |line: usize,
                                s: &String,
                                states: &mut Vec<String>,
                                output_map: &mut Vec<(String, String)>|
     -> Result<(), ParseError> {
        if states.contains(s) {
            return Ok(());
        }
        match &default_output {
            Some((_, y)) => {
                states.push(s.clone());
                output_map.push((s.clone(), y.clone()));
                Ok(())
            }
            None => Err(semantic(line, format!("undeclared state `{s}`"))),
        }
    };
    for (line, _, state) in &inputs {
        require_declared(*line, state, &mut states, &mut output_map)?;
    }
    for (line, _, parts) in &rules {
        for s in parts {
            require_declared(*line, s, &mut states, &mut output_map)?;
        }
    }

    // Y, in order of first appearance.
    let mut output_symbols: Vec<String> = Vec::new();
    for (_, y) in &output_map {
        if !output_symbols.contains(y) {
            output_symbols.push(y.clone());
        }
    }

    let input_symbols: Vec<String> = inputs.iter().map(|(_, s, _)| s.clone()).collect();
    {
        let mut seen = Vec::new();
        for (line, sym, _) in &inputs {
            if seen.contains(&sym) {
                return Err(semantic(*line, format!("duplicate input symbol `{sym}`")));
            }
            seen.push(sym);
        }
    }
    let input_map: Vec<(String, String)> = inputs
        .iter()
        .map(|(_, s, q)| (s.clone(), q.clone()))
        .collect();

    // Expand sym: rules into both orientations; reject colliding left sides.
    let mut expanded: Vec<NamedRule> = Vec::new();
    let mut seen_lhs: Vec<(String, String)> = Vec::new();
    let push_rule = |line: usize,
                         a: &str,
                         b: &str,
                         c: &str,
                         d: &str,
                         expanded: &mut Vec<NamedRule>,
                         seen_lhs: &mut Vec<(String, String)>|
     -> Result<(), ParseError> {
        let lhs = (a.to_string(), b.to_string());
        if seen_lhs.contains(&lhs) {
            return Err(semantic(
                line,
                format!("duplicate rule left-hand side `{a} {b}`"),
            ));
        }
        seen_lhs.push(lhs.clone());
        expanded.push((lhs, (c.to_string(), d.to_string())));
        Ok(())
    };
    for (line, symmetric, [a, b, c, d]) in &rules {
        push_rule(*line, a, b, c, d, &mut expanded, &mut seen_lhs)?;
        if *symmetric && !(a == b && c == d) {
            push_rule(*line, b, a, d, c, &mut expanded, &mut seen_lhs)?;
        }
    }

    Ok(Protocol::new(
        name,
        input_symbols,
        output_symbols,
        states,
        input_map,
        output_map,
        expanded,
    )?)
}

/// Serializes a protocol in the text format, listing every state explicitly
/// and only the effective transitions.
pub fn serialize_protocol(p: &Protocol) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol {}\n", p.name()));
    let inputs: Vec<String> = p
        .inputs()
        .iter()
        .map(|sym| format!("{sym} -> {}", p.state_name(p.input_state(sym).unwrap())))
        .collect();
    out.push_str(&format!("inputs: {}\n", inputs.join(", ")));
    let outputs: Vec<String> = p
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                "{s} -> {}",
                p.output_symbol(crate::model::StateId(i))
            )
        })
        .collect();
    out.push_str(&format!("outputs: {}\n", outputs.join(", ")));
    out.push_str("rules:\n");
    for ((a, b), (c, d)) in p.effective_rules() {
        out.push_str(&format!(
            "  {} {} -> {} {}\n",
            p.state_name(a),
            p.state_name(b),
            p.state_name(c),
            p.state_name(d)
        ));
    }
    out
}

/// A protocol together with its textual form and where it came from.
#[derive(Debug, Clone)]
pub struct ProtocolSource {
    pub raw: String,
    pub protocol: Protocol,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    File(String),
    Builtin(String),
}

impl ProtocolSource {
    pub fn from_text(text: &str, path: impl Into<String>) -> Result<Self, ParseError> {
        let protocol = parse_protocol(text)?;
        Ok(ProtocolSource {
            raw: text.to_string(),
            protocol,
            provenance: Provenance::File(path.into()),
        })
    }

    pub fn from_builtin(b: &Builtin) -> Self {
        let protocol = b.protocol();
        ProtocolSource {
            raw: serialize_protocol(&protocol),
            provenance: Provenance::Builtin(protocol.name().to_string()),
            protocol,
        }
    }
}
