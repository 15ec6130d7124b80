//! Text format for reaction models.
//!
//! ```text
//! # comments run to end of line
//! species X1 cap 80
//! species X2 cap 80
//! init X1 40
//! init X2 40
//! reaction 10 : X1 -> X2
//! reaction 0.03 : 2 X -> 3 X
//! reaction 200 : 0 -> X
//! horizon 10
//! ```
//!
//! Grammar, one statement per line:
//!
//! * `species <name> cap <int>` declares a species and its maximum count.
//!   Names match `[A-Za-z_][A-Za-z0-9_]*`.
//! * `init <name> <int>` sets the initial count (default 0).
//! * `reaction <rate> : <side> -> <side>` adds a mass-action channel. A side
//!   is `0`, empty, or terms joined by `+`; a term is `[m][*]name`, e.g.
//!   `X`, `2 X`, `2*X`, `2X`. The reactant side sets the propensity orders,
//!   and products minus reactants give the change vector.
//! * `horizon <float>` sets the final time; required.
//!
//! Species must be declared before use. Rates are written with Rust's
//! shortest round-trip float formatting, so `serialize` then `parse` is
//! bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{InitialCondition, PropensitySpec, ReactionModel, Scenario};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Builder {
    names: Vec<String>,
    caps: Vec<u32>,
    init: Vec<i64>,
    stoich: Vec<Vec<i64>>,
    props: Vec<PropensitySpec>,
    horizon: Option<f64>,
}

impl Builder {
    fn lookup(&self, line: usize, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| perr(line, format!("unknown species '{name}'")))
    }

    /// Parses one side of a reaction into species -> multiplicity.
    fn side(&self, line: usize, text: &str) -> Result<BTreeMap<usize, u32>> {
        let mut out = BTreeMap::new();
        let text = text.trim();
        if text.is_empty() || text == "0" {
            return Ok(out);
        }
        for term in text.split('+') {
            let term = term.trim();
            let digits = term.find(|c: char| !c.is_ascii_digit()).unwrap_or(term.len());
            let (count, rest) = term.split_at(digits);
            let rest = rest.trim_start();
            let rest = rest.strip_prefix('*').unwrap_or(rest).trim_start();
            let m: u32 = if count.is_empty() {
                1
            } else {
                count
                    .parse()
                    .map_err(|_| perr(line, format!("bad multiplicity in '{term}'")))?
            };
            if !is_name(rest) {
                return Err(perr(line, format!("malformed term '{term}'")));
            }
            if m == 0 {
                return Err(perr(line, format!("zero multiplicity in '{term}'")));
            }
            *out.entry(self.lookup(line, rest)?).or_insert(0) += m;
        }
        Ok(out)
    }
}

/// Parses a model file into a validated scenario.
pub fn parse_model(text: &str) -> Result<Scenario> {
    let mut b = Builder {
        names: Vec::new(),
        caps: Vec::new(),
        init: Vec::new(),
        stoich: Vec::new(),
        props: Vec::new(),
        horizon: None,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        let rest = rest.trim();
        match keyword {
            "species" => {
                let words: Vec<&str> = rest.split_whitespace().collect();
                let [name, "cap", cap] = words[..] else {
                    return Err(perr(line, "expected 'species <name> cap <int>'"));
                };
                if !is_name(name) {
                    return Err(perr(line, format!("invalid species name '{name}'")));
                }
                if b.names.iter().any(|n| n == name) {
                    return Err(perr(line, format!("duplicate species '{name}'")));
                }
                let cap: i64 = cap
                    .parse()
                    .map_err(|_| perr(line, format!("invalid cap '{cap}'")))?;
                if cap < 0 {
                    return Err(perr(line, "negative cap"));
                }
                let cap = u32::try_from(cap).map_err(|_| perr(line, "cap too large"))?;
                b.names.push(name.to_string());
                b.caps.push(cap);
                b.init.push(0);
            }
            "init" => {
                let words: Vec<&str> = rest.split_whitespace().collect();
                let [name, count] = words[..] else {
                    return Err(perr(line, "expected 'init <name> <int>'"));
                };
                let idx = b.lookup(line, name)?;
                let count: i64 = count
                    .parse()
                    .map_err(|_| perr(line, format!("invalid count '{count}'")))?;
                if count < 0 || count > b.caps[idx] as i64 {
                    return Err(perr(
                        line,
                        format!("initial count {count} outside 0..={}", b.caps[idx]),
                    ));
                }
                b.init[idx] = count;
            }
            "reaction" => {
                let (rate, eq) = rest
                    .split_once(':')
                    .ok_or_else(|| perr(line, "expected 'reaction <rate> : <lhs> -> <rhs>'"))?;
                let rate_text = rate.trim();
                let rate: f64 = rate_text
                    .parse()
                    .map_err(|_| perr(line, format!("invalid rate '{rate_text}'")))?;
                if rate < 0.0 {
                    return Err(perr(line, "negative rate"));
                }
                if !rate.is_finite() {
                    return Err(perr(line, "non-finite rate"));
                }
                let (lhs, rhs) = eq
                    .split_once("->")
                    .ok_or_else(|| perr(line, "missing '->'"))?;
                let reactants = b.side(line, lhs)?;
                let products = b.side(line, rhs)?;
                let mut v = vec![0i64; b.names.len()];
                for (&s, &m) in &products {
                    v[s] += m as i64;
                }
                for (&s, &m) in &reactants {
                    v[s] -= m as i64;
                }
                if v.iter().all(|&c| c == 0) {
                    return Err(perr(line, "reaction has no net effect"));
                }
                b.stoich.push(v);
                b.props
                    .push(PropensitySpec::new(rate, reactants.into_iter().collect()));
            }
            "horizon" => {
                let h: f64 = rest
                    .parse()
                    .map_err(|_| perr(line, format!("invalid horizon '{rest}'")))?;
                if !(h.is_finite() && h >= 0.0) {
                    return Err(perr(line, "horizon must be a nonnegative number"));
                }
                b.horizon = Some(h);
            }
            other => return Err(perr(line, format!("unknown statement '{other}'"))),
        }
    }
    // reactions declared before all species have short change vectors
    let n = b.names.len();
    for v in &mut b.stoich {
        v.resize(n, 0);
    }
    let horizon = b.horizon.ok_or_else(|| perr(0, "missing 'horizon'"))?;
    let model = ReactionModel::new(b.names, b.caps, b.stoich, b.props)
        .map_err(|e| perr(0, e.to_string()))?;
    Ok(Scenario {
        model,
        initial: InitialCondition::new(b.init),
        horizon,
    })
}

fn write_side(out: &mut String, names: &[String], terms: &[(usize, i64)]) {
    let terms: Vec<String> = terms
        .iter()
        .filter(|&&(_, m)| m > 0)
        .map(|&(s, m)| {
            if m == 1 {
                names[s].clone()
            } else {
                format!("{m} {}", names[s])
            }
        })
        .collect();
    if terms.is_empty() {
        out.push('0');
    } else {
        out.push_str(&terms.join(" + "));
    }
}

/// Writes a scenario in the model file format.
pub fn serialize_model(scenario: &Scenario) -> String {
    let model = &scenario.model;
    let names = &model.species_names;
    let mut out = String::new();
    for (name, cap) in names.iter().zip(&model.caps) {
        let _ = writeln!(out, "species {name} cap {cap}");
    }
    for (name, x) in names.iter().zip(&scenario.initial.state) {
        let _ = writeln!(out, "init {name} {x}");
    }
    for (v, prop) in model.stoich.iter().zip(&model.propensities) {
        let reactants: Vec<(usize, i64)> =
            prop.orders.iter().map(|&(s, m)| (s, m as i64)).collect();
        let mut products = vec![0i64; names.len()];
        for &(s, m) in &reactants {
            products[s] += m;
        }
        for (p, dv) in products.iter_mut().zip(v) {
            *p += dv;
        }
        let products: Vec<(usize, i64)> = products.into_iter().enumerate().collect();
        let _ = write!(out, "reaction {} : ", prop.rate);
        write_side(&mut out, names, &reactants);
        out.push_str(" -> ");
        write_side(&mut out, names, &products);
        out.push('\n');
    }
    let _ = writeln!(out, "horizon {}", scenario.horizon);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_isomer, builtin_schlogl};

    #[test]
    fn builtins_round_trip() {
        for s in [builtin_isomer(), builtin_schlogl()] {
            let text = serialize_model(&s);
            let back = parse_model(&text).unwrap();
            assert_eq!(back, s, "{text}");
            assert_eq!(serialize_model(&back), text);
        }
    }

    #[test]
    fn schlogl_text() {
        let text = serialize_model(&builtin_schlogl());
        assert!(text.contains("reaction 0.03 : 2 X -> 3 X"), "{text}");
        assert!(text.contains("reaction 200 : 0 -> X"), "{text}");
        assert!(text.contains("reaction 3.5 : X -> 0"), "{text}");
    }

    #[test]
    fn term_spellings() {
        let a = parse_model("species X cap 9\nreaction 1 : 2*X -> 3X\nhorizon 1").unwrap();
        let b = parse_model("species X cap 9\nreaction 1 : 2 X -> X + 2 X\nhorizon 1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model.propensities[0].orders, vec![(0, 2)]);
    }

    #[test]
    fn negative_rate_is_rejected() {
        let err = parse_model("species A cap 5\nreaction -1 : A -> 0\nhorizon 1").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                message: "negative rate".into()
            }
        );
    }

    #[test]
    fn negative_cap_is_rejected() {
        let err = parse_model("species A cap -2\nhorizon 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, ref message } if message == "negative cap"));
    }

    #[test]
    fn undeclared_species_is_rejected() {
        let err = parse_model("species A cap 5\n\n reaction 1 : A -> B\nhorizon 1").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("unknown species 'B'"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("species A\nhorizon 1", 1),
            ("species A cap 3\nreaction 1 A -> 0\nhorizon 1", 2),
            ("species A cap 3\nreaction 1 : A => 0\nhorizon 1", 2),
            ("species A cap 3\nfoo bar\n", 2),
            ("species A cap 3\nreaction 1 : A -> A\nhorizon 1", 2),
            ("species A cap 3\ninit A 4\nhorizon 1", 2),
            ("species A cap 3\nreaction 1 : A -> 0\n", 0),
        ] {
            match parse_model(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
