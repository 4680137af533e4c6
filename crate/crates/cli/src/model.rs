//! Model-spec grammar: `family[:subfamily][:key=value]...`, with positional
//! parameters in parentheses, e.g. `archimedean:gumbel(2):d=3` or
//! `elliptical:kotz(1,1,0.5):rho=0.5`.

use std::collections::BTreeMap;

use tailorder::copulas::{CopulaModel, PickandsFn};
use tailorder::generators::Generator;
use tailorder::RadialLaw;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
struct Term {
    name: String,
    args: Vec<f64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_term(tok: &str) -> CliResult<Term> {
    let Some(open) = tok.find('(') else {
        return Ok(Term { name: tok.to_ascii_lowercase(), args: vec![] });
    };
    if !tok.ends_with(')') {
        return Err(usage(format!("unbalanced parentheses in `{tok}`")));
    }
    let inner = &tok[open + 1..tok.len() - 1];
    let args = if inner.trim().is_empty() {
        vec![]
    } else {
        inner
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| usage(format!("`{a}` is not a number in `{tok}`"))))
            .collect::<CliResult<_>>()?
    };
    Ok(Term { name: tok[..open].to_ascii_lowercase(), args })
}

fn split_top(spec: &str) -> CliResult<Vec<&str>> {
    let mut parts = vec![];
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in spec.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ':' if depth == 0 => {
                parts.push(&spec[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(usage(format!("unbalanced parentheses in `{spec}`")));
        }
    }
    if depth != 0 {
        return Err(usage(format!("unbalanced parentheses in `{spec}`")));
    }
    parts.push(&spec[start..]);
    Ok(parts)
}

fn arity(t: &Term, n: usize) -> CliResult<()> {
    if t.args.len() == n {
        Ok(())
    } else {
        Err(usage(format!("`{}` takes {n} parameter(s), got {}", t.name, t.args.len())))
    }
}

fn parse_law(t: &Term, d: u32) -> CliResult<RadialLaw> {
    let a = &t.args;
    let law = match t.name.as_str() {
        "dagum" => match a.len() {
            2 => RadialLaw::dagum(a[0], a[1], 1.0),
            3 => RadialLaw::dagum(a[0], a[1], a[2]),
            _ => return Err(usage("`dagum` takes (alpha, beta[, sigma])")),
        },
        "weibull" => {
            arity(t, 1)?;
            RadialLaw::positive_weibull(a[0])
        }
        "kproduct" => {
            arity(t, 1)?;
            RadialLaw::k_product(d, a[0])
        }
        "gamma" => {
            arity(t, 1)?;
            RadialLaw::gamma(a[0])
        }
        "invgamma" => {
            arity(t, 1)?;
            RadialLaw::inverse_gamma(a[0])
        }
        "pointmass" => {
            arity(t, 1)?;
            RadialLaw::point_mass(a[0])
        }
        "geninvgammat" => {
            arity(t, 1)?;
            RadialLaw::gen_inv_gamma_t(a[0])
        }
        "kotz" => {
            arity(t, 3)?;
            RadialLaw::kotz(a[0], a[1], a[2])
        }
        other => return Err(usage(format!("unknown radial law `{other}`"))),
    };
    Ok(law?)
}

/// Parse a model spec into a copula model.
pub fn parse_model(spec: &str) -> CliResult<CopulaModel> {
    let parts = split_top(spec.trim())?;
    let mut terms = vec![];
    let mut kv = BTreeMap::new();
    for p in parts {
        if p.is_empty() {
            return Err(usage(format!("empty component in `{spec}`")));
        }
        if let Some((k, v)) = p.split_once('=') {
            let v: f64 = v.parse().map_err(|_| usage(format!("`{v}` is not a number")))?;
            if kv.insert(k.to_ascii_lowercase(), v).is_some() {
                return Err(usage(format!("`{k}` given twice")));
            }
        } else {
            terms.push(parse_term(p)?);
        }
    }
    let take = |kv: &mut BTreeMap<String, f64>, key: &str| kv.remove(key);
    let dim = |kv: &mut BTreeMap<String, f64>| -> CliResult<u32> {
        match take(kv, "d") {
            None => Ok(2),
            Some(v) if v >= 2.0 && v.fract() == 0.0 && v <= 1e6 => Ok(v as u32),
            Some(v) => Err(usage(format!("d must be an integer >= 2, got {v}"))),
        }
    };
    let rho = |kv: &mut BTreeMap<String, f64>| take(kv, "rho").ok_or_else(|| usage("missing `rho=`"));
    let family = terms.first().cloned().ok_or_else(|| usage("empty model spec"))?;
    let rest = &terms[1..];
    let sub = |i: usize| rest.get(i).ok_or_else(|| usage(format!("`{}` needs a subfamily", family.name)));

    let model = match family.name.as_str() {
        "independence" => CopulaModel::independence(dim(&mut kv)?)?,
        "comonotone" => CopulaModel::comonotone(dim(&mut kv)?)?,
        "gaussian" => CopulaModel::gaussian(rho(&mut kv)?)?,
        "student" => {
            arity(&family, 1)?;
            CopulaModel::student(rho(&mut kv)?, family.args[0])?
        }
        "elliptical" => {
            let s = sub(0)?;
            let r = rho(&mut kv)?;
            match s.name.as_str() {
                "gaussian" => CopulaModel::gaussian(r)?,
                "student" => {
                    arity(s, 1)?;
                    CopulaModel::student(r, s.args[0])?
                }
                "kotz" => {
                    arity(s, 3)?;
                    CopulaModel::kotz(r, s.args[0], s.args[1], s.args[2])?
                }
                other => return Err(usage(format!("unknown elliptical family `{other}`"))),
            }
        }
        "archimedean" => {
            let d = dim(&mut kv)?;
            let s = sub(0)?;
            let g = match s.name.as_str() {
                "gumbel" => {
                    arity(s, 1)?;
                    Generator::gumbel(s.args[0])?
                }
                "acig" => {
                    arity(s, 1)?;
                    Generator::acig(s.args[0])?
                }
                "joe2000" => {
                    arity(s, 1)?;
                    Generator::joe2000(s.args[0])?
                }
                "williamson" => {
                    let law = parse_law(sub(1)?, d)?;
                    Generator::williamson(law, d)?
                }
                other => return Err(usage(format!("unknown generator `{other}`"))),
            };
            CopulaModel::archimedean(d, g)?
        }
        "ev" => {
            let d = dim(&mut kv)?;
            let s = sub(0)?;
            let a = match s.name.as_str() {
                "logistic" => {
                    arity(s, 1)?;
                    PickandsFn::logistic(s.args[0], d)?
                }
                "sum" => PickandsFn::SumA { d },
                "max" => PickandsFn::MaxA { d },
                other => return Err(usage(format!("unknown Pickands family `{other}`"))),
            };
            CopulaModel::extreme_value(a)?
        }
        other => return Err(usage(format!("unknown model family `{other}`"))),
    };
    if let Some(k) = kv.keys().next() {
        return Err(usage(format!("unexpected parameter `{k}=` for this model")));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_examples() {
        assert_eq!(parse_model("independence:d=2").unwrap(), CopulaModel::Independence { d: 2 });
        assert_eq!(parse_model("comonotone:d=4").unwrap(), CopulaModel::Comonotone { d: 4 });
        assert_eq!(parse_model("gaussian:rho=0.5").unwrap(), CopulaModel::GaussianBiv { rho: 0.5 });
        assert_eq!(
            parse_model("elliptical:kotz(1,1,0.5):rho=0.5").unwrap(),
            CopulaModel::KotzBiv { rho: 0.5, n: 1.0, beta: 1.0, xi: 0.5 }
        );
        assert_eq!(parse_model("elliptical:student(4):rho=0.3").unwrap(), CopulaModel::StudentBiv { rho: 0.3, nu: 4.0 });
        assert_eq!(parse_model("ev:logistic(2):d=2").unwrap(), CopulaModel::ExtremeValue(PickandsFn::Logistic { theta: 2.0, d: 2 }));
        assert_eq!(parse_model("ev:max:d=3").unwrap(), CopulaModel::ExtremeValue(PickandsFn::MaxA { d: 3 }));
        match parse_model("archimedean:gumbel(2):d=3").unwrap() {
            CopulaModel::Archimedean { d: 3, generator: Generator::Gumbel { theta } } => assert_eq!(theta, 2.0),
            other => panic!("{other:?}"),
        }
        match parse_model("archimedean:williamson:dagum(0.6,1.8,1):d=2").unwrap() {
            CopulaModel::Archimedean { d: 2, generator: Generator::Williamson(w) } => {
                assert_eq!(w.law, RadialLaw::Dagum { alpha: 0.6, beta: 1.8, sigma: 1.0 })
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_model("archimedean:acig(1.5):d=2").is_ok());
        assert!(parse_model("archimedean:williamson:kproduct(2.5):d=3").is_ok());
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "unknown:d=2",
            "gaussian",
            "gaussian:rho=2",
            "gaussian:rho=0.5:d=3",
            "archimedean:gumbel(2,3):d=2",
            "archimedean:gumbel(0.5):d=2",
            "archimedean:williamson:nope(1):d=2",
            "ev:logistic(2:d=2",
            "independence:d=1.5",
            "elliptical:kotz(1,1):rho=0.5",
            "archimedean:gumbel(x):d=2",
        ] {
            let err = parse_model(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }
}
