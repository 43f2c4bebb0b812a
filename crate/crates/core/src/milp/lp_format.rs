use std::collections::HashSet;
use std::fmt::Write as _;

use super::{MilpModel, Sense, VarKind};

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        s.insert(0, '_');
    }
    s
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .enumerate()
        .map(|(i, n)| {
            let base = sanitize(n);
            if seen.insert(base.clone()) {
                base
            } else {
                let alt = format!("{base}_{i}");
                seen.insert(alt.clone());
                alt
            }
        })
        .collect()
}

fn write_terms(out: &mut String, terms: &[(super::VarId, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        if let Some(first) = names.first() {
            let _ = write!(out, " {first}");
        }
        return;
    }
    for (i, (v, c)) in terms.iter().enumerate() {
        let sign = if *c < 0.0 { " -" } else if i > 0 { " +" } else { "" };
        let _ = write!(out, "{sign} {} {}", c.abs(), names[v.index()]);
    }
}

/// Renders the model in CPLEX LP text format.
pub fn write_lp(model: &MilpModel) -> String {
    let vars = unique_names(model.variables.iter().map(|v| v.name.as_str()));
    let rows = unique_names(model.constraints.iter().map(|c| c.name.as_str()));
    let mut out = String::new();
    let _ = writeln!(out, "\\ objective constant {}", model.objective.constant);
    out.push_str("Maximize\n obj:");
    write_terms(&mut out, &model.objective.terms, &vars);
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        write_terms(&mut out, &c.terms, &vars);
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&vars) {
        if v.kind == VarKind::Binary {
            continue;
        }
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
        }
    }
    let binaries: Vec<_> = model
        .variables
        .iter()
        .zip(&vars)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    if !model.sos2.is_empty() {
        out.push_str("SOS\n");
        for set in &model.sos2 {
            let _ = write!(out, " {}: S2::", sanitize(&set.name));
            for (i, m) in set.members.iter().enumerate() {
                let _ = write!(out, " {}:{}", vars[m.index()], i + 1);
            }
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}
