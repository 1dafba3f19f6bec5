use std::collections::HashMap;
use std::fmt::Write;

use num_rational::BigRational;

use super::{DerivBound, Model};
use crate::error::{Error, Result};
use crate::sym::{is_identifier, parse_expr_with, Expr, ExprParseError, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    States,
    Parameters,
    KnownInputs,
    UnknownInputs,
    Dynamics,
    Outputs,
    Options,
}

impl Section {
    fn from_header(name: &str) -> Option<Section> {
        Some(match name {
            "states" => Section::States,
            "parameters" => Section::Parameters,
            "known_inputs" => Section::KnownInputs,
            "unknown_inputs" => Section::UnknownInputs,
            "dynamics" => Section::Dynamics,
            "outputs" => Section::Outputs,
            "options" => Section::Options,
            _ => return None,
        })
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

#[derive(Default)]
struct Raw {
    states: Vec<(usize, String)>,
    parameters: Vec<(usize, String)>,
    constants: Vec<(usize, String, String)>,
    known_inputs: Vec<(usize, String)>,
    unknown_inputs: Vec<(usize, String)>,
    dynamics: Vec<(usize, String, String)>,
    outputs: Vec<(usize, String, String)>,
    options: Vec<(usize, String, String)>,
}

fn split_assignment(line: usize, body: &str) -> Result<(String, String)> {
    let (lhs, rhs) = body
        .split_once('=')
        .ok_or_else(|| parse_err(line, format!("expected `name = value`, got `{body}`")))?;
    Ok((lhs.trim().to_string(), rhs.trim().to_string()))
}

fn collect(text: &str) -> Result<Raw> {
    let mut raw = Raw::default();
    let mut section: Option<Section> = None;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let body = full.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let mut rest = body;
        if let Some((head, tail)) = body.split_once(':') {
            if let Some(s) = Section::from_header(head.trim()) {
                section = Some(s);
                rest = tail.trim();
                if rest.is_empty() {
                    continue;
                }
            }
        }
        let Some(sec) = section else {
            return Err(parse_err(line, "content before the first section header"));
        };
        match sec {
            Section::States | Section::KnownInputs | Section::UnknownInputs | Section::Parameters => {
                for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    if sec == Section::Parameters && item.contains('=') {
                        let (name, value) = split_assignment(line, item)?;
                        raw.constants.push((line, name, value));
                        continue;
                    }
                    let target = match sec {
                        Section::States => &mut raw.states,
                        Section::KnownInputs => &mut raw.known_inputs,
                        Section::UnknownInputs => &mut raw.unknown_inputs,
                        _ => &mut raw.parameters,
                    };
                    target.extend(item.split_whitespace().map(|n| (line, n.to_string())));
                }
            }
            Section::Dynamics => {
                let (lhs, rhs) = split_assignment(line, rest)?;
                let state = lhs
                    .strip_suffix('\'')
                    .ok_or_else(|| parse_err(line, format!("expected `<state>' = <expr>`, got `{lhs}`")))?;
                raw.dynamics.push((line, state.trim().to_string(), rhs));
            }
            Section::Outputs => {
                let (lhs, rhs) = split_assignment(line, rest)?;
                raw.outputs.push((line, lhs, rhs));
            }
            Section::Options => {
                let (lhs, rhs) = split_assignment(line, rest)?;
                raw.options.push((line, lhs, rhs));
            }
        }
    }
    Ok(raw)
}

fn map_expr_err(line: usize, e: ExprParseError) -> Error {
    match e {
        ExprParseError::Undeclared(name) => Error::UndeclaredSymbol { name, line: Some(line) },
        other => parse_err(line, other.to_string()),
    }
}

/// Parse the model-file format. Declaration order fixes symbol order.
/// Parameters written `name = value` are known constants and are
/// substituted into the equations.
pub fn parse_model(text: &str) -> Result<Model> {
    let raw = collect(text)?;

    let mut declared: HashMap<String, Expr> = HashMap::new();
    let mut check_new = |line: usize, name: &str, value: Expr| -> Result<()> {
        if !is_identifier(name) {
            return Err(parse_err(line, format!("`{name}` is not a valid identifier")));
        }
        if declared.insert(name.to_string(), value).is_some() {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
        Ok(())
    };

    let syms = |list: &[(usize, String)], check: &mut dyn FnMut(usize, &str, Expr) -> Result<()>| {
        list.iter()
            .map(|(line, n)| {
                check(*line, n, Expr::var(n))?;
                Ok(Symbol::new(n))
            })
            .collect::<Result<Vec<Symbol>>>()
    };
    let states = syms(&raw.states, &mut check_new)?;
    let parameters = syms(&raw.parameters, &mut check_new)?;
    let known_inputs = syms(&raw.known_inputs, &mut check_new)?;
    let unknown_inputs = syms(&raw.unknown_inputs, &mut check_new)?;

    let mut constants = Vec::new();
    for (line, name, value) in &raw.constants {
        let v = parse_expr_with(value, |_| None).map_err(|e| map_expr_err(*line, e))?;
        let r: BigRational = v
            .as_num()
            .cloned()
            .ok_or_else(|| parse_err(*line, format!("value of `{name}` is not a number")))?;
        check_new(*line, name, Expr::num(r.clone()))?;
        constants.push((Symbol::new(name), r));
    }

    let parse =
        |line: usize, src: &str| parse_expr_with(src, |n| declared.get(n).cloned()).map_err(|e| map_expr_err(line, e));

    let mut dynamics: Vec<Option<Expr>> = vec![None; states.len()];
    for (line, state, rhs) in &raw.dynamics {
        let i = states
            .iter()
            .position(|s| s.name() == state)
            .ok_or_else(|| parse_err(*line, format!("`{state}` is not a declared state")))?;
        if dynamics[i].is_some() {
            return Err(parse_err(*line, format!("second equation for `{state}`")));
        }
        dynamics[i] = Some(parse(*line, rhs)?);
    }
    let dynamics = dynamics
        .into_iter()
        .zip(&states)
        .map(|(d, s)| d.ok_or_else(|| parse_err(text.lines().count(), format!("no equation for state `{s}`"))))
        .collect::<Result<Vec<_>>>()?;

    if raw.outputs.is_empty() {
        return Err(parse_err(text.lines().count().max(1), "no outputs declared"));
    }
    let mut outputs = Vec::new();
    let mut output_names = Vec::new();
    for (line, name, rhs) in &raw.outputs {
        if !is_identifier(name) {
            return Err(parse_err(*line, format!("`{name}` is not a valid output name")));
        }
        if declared.contains_key(name) || output_names.contains(name) {
            return Err(Error::DuplicateSymbol(name.clone()));
        }
        outputs.push(parse(*line, rhs)?);
        output_names.push(name.clone());
    }

    let mut model = Model::new(states, parameters, known_inputs, unknown_inputs, dynamics, outputs)?
        .with_constants(constants)?
        .with_output_names(output_names)?;

    for (line, key, value) in &raw.options {
        let bad = |reason: String| parse_err(*line, reason);
        if let Some(input) = key.strip_prefix("u_deriv_bound.") {
            let b: DerivBound = value.parse().map_err(bad)?;
            model
                .set_u_deriv_bound(input.trim(), b)
                .map_err(|e| bad(e.to_string()))?;
        } else if let Some(input) = key.strip_prefix("w_deriv_bound.") {
            let b: u32 = value
                .parse()
                .map_err(|_| bad(format!("expected a non-negative integer, got `{value}`")))?;
            model
                .set_w_deriv_bound(input.trim(), b)
                .map_err(|e| bad(e.to_string()))?;
        } else if key == "exclude" {
            let names: Vec<String> = value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            model.set_excluded(&names).map_err(|e| bad(e.to_string()))?;
        } else {
            return Err(bad(format!("unknown option `{key}`")));
        }
    }
    Ok(model)
}

fn join(syms: &[Symbol]) -> String {
    syms.iter().map(Symbol::name).collect::<Vec<_>>().join(", ")
}

fn header(out: &mut String, name: &str, items: &str) {
    if items.is_empty() {
        let _ = writeln!(out, "{name}:");
    } else {
        let _ = writeln!(out, "{name}: {items}");
    }
}

pub(super) fn to_text(m: &Model) -> String {
    let mut out = String::new();
    header(&mut out, "states", &join(&m.states));
    let mut params: Vec<String> = m.parameters.iter().map(|s| s.name().to_string()).collect();
    params.extend(
        m.constants
            .iter()
            .map(|(s, v)| format!("{s} = {}", Expr::num(v.clone()))),
    );
    header(&mut out, "parameters", &params.join(", "));
    header(&mut out, "known_inputs", &join(&m.known_inputs));
    header(&mut out, "unknown_inputs", &join(&m.unknown_inputs));
    out.push_str("dynamics:\n");
    for (s, f) in m.states.iter().zip(&m.dynamics) {
        let _ = writeln!(out, "  {s}' = {f}");
    }
    out.push_str("outputs:\n");
    for (n, h) in m.output_names.iter().zip(&m.outputs) {
        let _ = writeln!(out, "  {n} = {h}");
    }
    let mut options = Vec::new();
    for (u, b) in m.known_inputs.iter().zip(&m.u_deriv_bound) {
        options.push(format!("u_deriv_bound.{u} = {b}"));
    }
    for (w, b) in m.unknown_inputs.iter().zip(&m.w_deriv_bound) {
        options.push(format!("w_deriv_bound.{w} = {b}"));
    }
    if !m.excluded.is_empty() {
        options.push(format!("exclude = {}", join(&m.excluded)));
    }
    if !options.is_empty() {
        out.push_str("options:\n");
        for o in options {
            let _ = writeln!(out, "  {o}");
        }
    }
    out
}
