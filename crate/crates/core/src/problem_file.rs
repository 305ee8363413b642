//! JSON problem definitions.
//!
//! ```json
//! { "name": "cos_sqrt", "expression": "cos(sqrt(n))/n^2", "m": 2,
//!   "sigma_hat": "1", "known_S": null, "schedule": "gps:1.3" }
//! ```
//!
//! Either `builtin` or `expression` must be present. With `"kind": "product"`
//! the expression gives `v_n` of `prod (1 + v_n)` and `t` is required.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr;
use crate::numerics::{parse_rational, Complex, Precision};
use crate::sampling::Schedule;
use crate::series_model::{builtin, product_to_series, ProductProblem, SeriesProblem};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub builtin: Option<String>,
    pub expression: Option<String>,
    pub m: Option<u32>,
    /// Rational literal such as `"1"`, `"1/2"` or `"-1"`.
    pub sigma_hat: Option<String>,
    /// Complex literal such as `"-1"` or `"0.5+2i"`.
    #[serde(rename = "known_S")]
    pub known_s: Option<String>,
    pub schedule: Option<String>,
    /// `"series"` (default) or `"product"`.
    pub kind: Option<String>,
    pub t: Option<u32>,
}

/// A loaded problem and the schedule it asks for, if any.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub problem: SeriesProblem,
    pub schedule: Option<Schedule>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("problem file: {e}")))
    }

    pub fn load(&self) -> Result<LoadedProblem> {
        let mut problem = match (&self.builtin, &self.expression) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidProblem(
                    "give either 'builtin' or 'expression', not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidProblem("need 'builtin' or 'expression'".into()))
            }
            (Some(id), None) => {
                let mut p = builtin(id)?;
                if let Some(m) = self.m {
                    if m != p.m() {
                        return Err(Error::InvalidProblem(format!(
                            "builtin {id} has m = {}, file says {m}",
                            p.m()
                        )));
                    }
                }
                if let Some(name) = &self.name {
                    p.name = name.clone();
                }
                p
            }
            (None, Some(src)) => {
                let m = self
                    .m
                    .ok_or_else(|| Error::InvalidProblem("expression problems need 'm'".into()))?;
                let name = self.name.clone().unwrap_or_else(|| "user".to_string());
                let term = expr::parse(src)?.into_term_fn();
                match self.kind.as_deref().unwrap_or("series") {
                    "series" => SeriesProblem::new(name, m, term)?.with_description(format!("a_n = {src}")),
                    "product" => {
                        let t = self.t.ok_or_else(|| {
                            Error::InvalidProblem("product problems need 't'".into())
                        })?;
                        product_to_series(&ProductProblem::new(name, term, m, t)?)
                            .with_description(format!("prod (1 + {src})"))
                    }
                    other => return Err(Error::InvalidProblem(format!("unknown kind '{other}'"))),
                }
            }
        };
        if let Some(sh) = &self.sigma_hat {
            problem = problem.with_sigma_hat(parse_rational(sh)?)?;
        }
        if let Some(s) = &self.known_s {
            // Validate now so that errors surface at load time.
            Complex::parse(s, Precision::QUAD)?;
            let s = s.clone();
            problem = problem.with_known_s(Arc::new(move |p| {
                Complex::parse(&s, p).expect("validated at load")
            }));
        }
        let schedule = self.schedule.as_deref().map(Schedule::parse).transpose()?;
        Ok(LoadedProblem { problem, schedule })
    }
}

pub fn load_str(text: &str) -> Result<LoadedProblem> {
    ProblemFile::from_json(text)?.load()
}

pub fn load_path(path: &std::path::Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_problem() {
        let lp = load_str(
            r#"{"name":"z2","expression":"1/n^2","m":1,"sigma_hat":"1","known_S":"1.6449340668482264364724151666460251892","schedule":"aps:1,1"}"#,
        )
        .unwrap();
        assert_eq!(lp.problem.name, "z2");
        assert!(lp.problem.has_known_s());
        assert_eq!(lp.schedule.unwrap().to_string(), "aps:1,1");
        let s = lp.problem.samples(2, Precision::QUAD).unwrap();
        assert_eq!(s.sum(2).re.to_f64(), 1.25);
    }

    #[test]
    fn builtin_and_product() {
        let lp = load_str(r#"{"builtin":"ex5_2","sigma_hat":"1/2"}"#).unwrap();
        assert_eq!(lp.problem.sigma_hat(), &rug::Rational::from((1, 2)));
        let lp = load_str(r#"{"expression":"-1/(4*n^2)","m":1,"kind":"product","t":2}"#).unwrap();
        let s = lp.problem.samples(2, Precision::QUAD).unwrap();
        assert!((s.sum(2).re.to_f64() - 0.75 * (1.0 - 1.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_files() {
        for bad in [
            r#"{"m":1}"#,
            r#"{"builtin":"ex5_1","expression":"n","m":1}"#,
            r#"{"expression":"n"}"#,
            r#"{"builtin":"nope"}"#,
            r#"{"builtin":"ex5_1","m":3}"#,
            r#"{"expression":"n","m":1,"kind":"product"}"#,
            r#"{"expression":"n","m":1,"bogus":1}"#,
            r#"{"expression":"1/n^2","m":1,"sigma_hat":"2"}"#,
            r#"{"expression":"1/n^2","m":1,"known_S":"x"}"#,
            "not json",
        ] {
            assert!(load_str(bad).is_err(), "{bad}");
        }
    }
}
