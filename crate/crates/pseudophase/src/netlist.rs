//! The `.net` text format.
//!
//! ```text
//! pseudophase-net v1
//! # comment
//! source s1 amp_up=1 amp_right=0
//! phase_mod m1 seq=1 in=s1
//! rotator r1 angle=45 in=m1
//! sink E1 in=r1
//! ```
//!
//! One component per line: `kind id key=value... in=port_ref...`, where a
//! port reference is `id` (first output) or `id.out_k`. Inputs are wired in
//! the order their `in=` tokens appear. The header line is optional; when
//! present it must come first.

use std::collections::HashMap;
use std::fmt::Write as _;

use pseudophase_core::field::Amplitude;
use pseudophase_core::network::{Component, ComponentKind, Element, Network, NetworkError, PortRef};
use pseudophase_core::optics::ModeFilter;

use crate::diag::{strip_comment, tokens, Diagnostic};

pub const HEADER: &str = "pseudophase-net v1";
const MAGIC: &str = "pseudophase-net";

/// Source locations of one parsed component.
#[derive(Debug, Clone)]
struct Span {
    line: usize,
    kind_col: usize,
    id_col: usize,
    params: Vec<(&'static str, usize)>,
    inputs: Vec<usize>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_port_ref(s: &str) -> Option<PortRef> {
    match s.split_once('.') {
        None => is_identifier(s).then(|| PortRef::new(s, 0)),
        Some((id, port)) => {
            let k = port.strip_prefix("out_")?;
            if !is_identifier(id) || k.is_empty() || !k.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            Some(PortRef::new(id, k.parse().ok()?))
        }
    }
}

fn allowed_params(kind: ComponentKind) -> &'static [&'static str] {
    match kind {
        ComponentKind::Source => &["amp_up", "amp_right"],
        ComponentKind::PhaseMod => &["seq"],
        ComponentKind::Rotator => &["angle"],
        ComponentKind::ModeFilter => &["pass"],
        ComponentKind::Splitter => &["n"],
        _ => &[],
    }
}

fn parse_amplitude(v: &str) -> Result<Amplitude, String> {
    v.parse::<f64>()
        .ok()
        .and_then(|x| Amplitude::new(x).ok())
        .ok_or_else(|| format!("expected a finite non-negative amplitude, found `{}`", v))
}

fn build_element(
    kind: ComponentKind,
    params: &HashMap<&'static str, (usize, &str)>,
) -> Result<Element, (Option<&'static str>, String)> {
    let get = |name: &'static str| {
        params
            .get(name)
            .map(|&(_, v)| v)
            .ok_or((None, format!("missing parameter `{}` for {}", name, kind)))
    };
    let bad = |name: &'static str, msg: String| (Some(name), msg);
    Ok(match kind {
        ComponentKind::Source => Element::Source {
            amp_up: parse_amplitude(get("amp_up")?).map_err(|m| bad("amp_up", m))?,
            amp_right: parse_amplitude(get("amp_right")?).map_err(|m| bad("amp_right", m))?,
        },
        ComponentKind::PhaseMod => {
            let v = get("seq")?;
            let sequence = v
                .parse::<u8>()
                .map_err(|_| bad("seq", format!("expected a sequence id (0-255), found `{}`", v)))?;
            Element::PhaseMod { sequence }
        }
        ComponentKind::Rotator => {
            let v = get("angle")?;
            let angle_deg = v
                .parse::<f64>()
                .ok()
                .filter(|a| a.is_finite())
                .ok_or_else(|| bad("angle", format!("expected a finite angle in degrees, found `{}`", v)))?;
            Element::Rotator { angle_deg }
        }
        ComponentKind::ModeFilter => {
            let v = get("pass")?;
            let pass = ModeFilter::parse(v)
                .ok_or_else(|| bad("pass", format!("expected `all`, `up` or `right`, found `{}`", v)))?;
            Element::ModeFilter(pass)
        }
        ComponentKind::Splitter => {
            let v = get("n")?;
            let n = v
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 2)
                .ok_or_else(|| bad("n", format!("expected an output count of at least 2, found `{}`", v)))?;
            Element::Splitter { n }
        }
        ComponentKind::Coupler2 => Element::Coupler2,
        ComponentKind::Pbs => Element::Pbs,
        ComponentKind::Combiner => Element::Combiner,
        ComponentKind::Sink => Element::Sink,
    })
}

/// Parses one component line. Returns the first problem found on the line.
fn parse_line(
    lineno: usize,
    toks: &[(usize, &str)],
) -> Result<(Component, Span), Diagnostic> {
    let err = |col: usize, msg: String| Diagnostic::error(lineno, col, msg);
    let (kind_col, kind_tok) = toks[0];
    let kind = ComponentKind::from_keyword(kind_tok)
        .ok_or_else(|| err(kind_col, format!("unknown component kind `{}`", kind_tok)))?;
    let &(id_col, id) = toks
        .get(1)
        .ok_or_else(|| err(kind_col, format!("missing component id after `{}`", kind)))?;
    if !is_identifier(id) {
        return Err(err(id_col, format!("invalid component id `{}`", id)));
    }

    let allowed = allowed_params(kind);
    let mut params: HashMap<&'static str, (usize, &str)> = HashMap::new();
    let mut inputs = Vec::new();
    let mut input_cols = Vec::new();
    for &(col, tok) in &toks[2..] {
        let Some((key, value)) = tok.split_once('=') else {
            return Err(err(col, format!("expected `key=value`, found `{}`", tok)));
        };
        if key == "in" {
            let r = parse_port_ref(value).ok_or_else(|| {
                err(col + 3, format!("malformed port reference `{}` (expected `id` or `id.out_k`)", value))
            })?;
            inputs.push(r);
            input_cols.push(col + 3);
            continue;
        }
        let Some(&name) = allowed.iter().find(|&&a| a == key) else {
            return Err(err(col, format!("unknown parameter `{}` for {}", key, kind)));
        };
        if let Some(&(first, _)) = params.get(name) {
            return Err(err(col, format!("parameter `{}` repeated (first given at column {})", key, first)));
        }
        params.insert(name, (col, value));
    }

    let element = build_element(kind, &params).map_err(|(name, msg)| {
        let col = name.and_then(|n| params.get(n)).map_or(id_col, |&(c, _)| c);
        err(col, msg)
    })?;
    let mut param_cols: Vec<(&'static str, usize)> = params.iter().map(|(&k, &(c, _))| (k, c)).collect();
    param_cols.sort();
    Ok((
        Component::new(id, element, inputs),
        Span {
            line: lineno,
            kind_col,
            id_col,
            params: param_cols,
            inputs: input_cols,
        },
    ))
}

fn locate(e: &NetworkError, components: &[Component], spans: &[Span]) -> Diagnostic {
    let message = e.to_string();
    let Some(id) = e.component() else {
        return Diagnostic::error(1, 1, message);
    };
    let mut matching = components.iter().zip(spans).filter(|(c, _)| c.id == id);
    let first = matching.next();
    // A duplicate is reported at its second declaration.
    let (_, span) = match e {
        NetworkError::DuplicateId { .. } => matching.next().or(first),
        _ => first,
    }
    .expect("error names a parsed component");
    let col = match e {
        NetworkError::InvalidParameter { name, .. } => span
            .params
            .iter()
            .find(|(n, _)| n == name)
            .map_or(span.id_col, |&(_, c)| c),
        NetworkError::Arity { .. } => span.kind_col,
        _ => e
            .input()
            .and_then(|j| span.inputs.get(j).copied())
            .unwrap_or(span.id_col),
    };
    Diagnostic::error(span.line, col, message)
}

/// Parses and validates a netlist. Syntax errors are collected (at most one
/// per line); structural errors are reported only for syntactically clean
/// input, one at a time.
pub fn parse_netlist(text: &str) -> Result<Network, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut components: Vec<Component> = Vec::new();
    let mut spans: Vec<Span> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut statements = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        statements += 1;
        if toks[0].1 == MAGIC {
            if statements != 1 {
                diags.push(Diagnostic::error(lineno, toks[0].0, "header must be the first line"));
            } else if toks.len() != 2 || toks[1].1 != "v1" {
                let col = toks.get(1).map_or(toks[0].0, |t| t.0);
                diags.push(Diagnostic::error(
                    lineno,
                    col,
                    format!("unsupported header (expected `{}`)", HEADER),
                ));
            }
            continue;
        }
        match parse_line(lineno, &toks) {
            Ok((c, span)) => {
                if let Some(&first) = seen.get(&c.id) {
                    diags.push(Diagnostic::error(
                        lineno,
                        span.id_col,
                        format!("duplicate component id `{}` (first declared on line {})", c.id, first),
                    ));
                    continue;
                }
                seen.insert(c.id.clone(), lineno);
                components.push(c);
                spans.push(span);
            }
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Network::new(components.clone()).map_err(|e| vec![locate(&e, &components, &spans)])
}

fn element_params(e: &Element) -> String {
    match e {
        Element::Source { amp_up, amp_right } => {
            format!(" amp_up={} amp_right={}", amp_up.value(), amp_right.value())
        }
        Element::PhaseMod { sequence } => format!(" seq={}", sequence),
        Element::Rotator { angle_deg } => format!(" angle={}", angle_deg),
        Element::ModeFilter(pass) => format!(" pass={}", pass.as_str()),
        Element::Splitter { n } => format!(" n={}", n),
        Element::Coupler2 | Element::Pbs | Element::Combiner | Element::Sink => String::new(),
    }
}

/// Canonical text: header, then one line per component in declaration
/// order with single spaces and shortest round-trip numbers.
pub fn pretty_print(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for c in net.components() {
        let _ = write!(out, "{} {}{}", c.element.kind(), c.id, element_params(&c.element));
        for r in &c.inputs {
            let _ = write!(out, " in={}", r);
        }
        out.push('\n');
    }
    out
}
