//! Sampling schedules `R_0 < R_1 < ...` of partial-sum indices.
//!
//! Arithmetic (APS) and geometric (GPS) progressions are evaluated on exact
//! rationals so that floors at integer boundaries never depend on binary
//! rounding of decimal parameters such as `1.3`.

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::parse_rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `R_l = floor(kappa*l + eta)`.
    Aps { kappa: Rational, eta: Rational },
    /// `R_0 = 1`, `R_l = max(floor(tau*R_{l-1}), l+1)`.
    Gps { tau: Rational },
    Explicit(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    kind: ScheduleKind,
}

impl Schedule {
    pub fn aps(kappa: Rational, eta: Rational) -> Result<Schedule> {
        if kappa < 1 {
            return Err(Error::InvalidSchedule(format!(
                "APS needs kappa >= 1, got {}",
                fmt_rational(&kappa)
            )));
        }
        if eta < 1 {
            return Err(Error::InvalidSchedule(format!(
                "APS needs eta >= 1, got {}",
                fmt_rational(&eta)
            )));
        }
        Ok(Schedule {
            kind: ScheduleKind::Aps { kappa, eta },
        })
    }

    pub fn aps_int(kappa: i64, eta: i64) -> Result<Schedule> {
        Schedule::aps(Rational::from(kappa), Rational::from(eta))
    }

    pub fn gps(tau: Rational) -> Result<Schedule> {
        if tau <= 1 {
            return Err(Error::InvalidSchedule(format!(
                "GPS needs tau > 1, got {}",
                fmt_rational(&tau)
            )));
        }
        if tau > 2 {
            log::warn!(
                "GPS ratio tau = {} exceeds 2; stability may suffer",
                fmt_rational(&tau)
            );
        }
        Ok(Schedule {
            kind: ScheduleKind::Gps { tau },
        })
    }

    /// GPS from a decimal literal such as `"1.3"`.
    pub fn gps_str(tau: &str) -> Result<Schedule> {
        Schedule::gps(parse_rational(tau).map_err(|e| Error::InvalidSchedule(e.to_string()))?)
    }

    pub fn explicit(values: Vec<u64>) -> Result<Schedule> {
        match values.first() {
            None => return Err(Error::InvalidSchedule("explicit schedule is empty".into())),
            Some(0) => {
                return Err(Error::InvalidSchedule(
                    "explicit schedule must start at R_0 >= 1".into(),
                ))
            }
            _ => {}
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSchedule(format!(
                "explicit schedule must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Schedule {
            kind: ScheduleKind::Explicit(values),
        })
    }

    /// Parses `aps:KAPPA,ETA`, `gps:TAU` or `list:R0,R1,...`.
    pub fn parse(spec: &str) -> Result<Schedule> {
        let bad = |msg: &str| Error::InvalidSchedule(format!("'{spec}': {msg}"));
        let (head, body) = spec
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected aps:K,E, gps:T or list:R0,R1,..."))?;
        let rat = |s: &str| parse_rational(s).map_err(|e| bad(&e.to_string()));
        match head.trim().to_ascii_lowercase().as_str() {
            "aps" => {
                let (k, e) = body
                    .split_once(',')
                    .ok_or_else(|| bad("APS needs two parameters"))?;
                Schedule::aps(rat(k)?, rat(e)?)
            }
            "gps" => Schedule::gps(rat(body)?),
            "list" => {
                let values = body
                    .split(',')
                    .map(|t| t.trim().parse::<u64>().map_err(|_| bad("non-integer entry")))
                    .collect::<Result<Vec<_>>>()?;
                Schedule::explicit(values)
            }
            _ => Err(bad("unknown schedule kind")),
        }
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Number of available values; `None` for unbounded progressions.
    pub fn len_limit(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn iter(&self) -> ScheduleIter<'_> {
        ScheduleIter {
            schedule: self,
            l: 0,
            prev: 0,
            failed: false,
        }
    }

    /// The first `count` values `R_0, ..., R_{count-1}`.
    pub fn prefix(&self, count: usize) -> Result<Vec<u64>> {
        if let Some(limit) = self.len_limit() {
            if count > limit {
                return Err(Error::InvalidSchedule(format!(
                    "explicit schedule has {limit} values, {count} requested"
                )));
            }
        }
        let v: Vec<u64> = self.iter().take(count).collect();
        if v.len() < count {
            return Err(Error::InvalidSchedule(format!(
                "schedule value R_{} exceeds the 64-bit index range",
                v.len()
            )));
        }
        Ok(v)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScheduleKind::Aps { kappa, eta } => {
                write!(f, "aps:{},{}", fmt_rational(kappa), fmt_rational(eta))
            }
            ScheduleKind::Gps { tau } => write!(f, "gps:{}", fmt_rational(tau)),
            ScheduleKind::Explicit(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

pub struct ScheduleIter<'a> {
    schedule: &'a Schedule,
    l: u64,
    prev: u64,
    failed: bool,
}

impl Iterator for ScheduleIter<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.failed {
            return None;
        }
        let l = self.l;
        let value = match &self.schedule.kind {
            ScheduleKind::Aps { kappa, eta } => {
                let x = Rational::from(kappa * Integer::from(l)) + eta;
                x.floor().numer().to_u64()
            }
            ScheduleKind::Gps { tau } => {
                if l == 0 {
                    Some(1)
                } else {
                    let x = Rational::from(tau * Integer::from(self.prev));
                    x.floor()
                        .numer()
                        .to_u64()
                        .map(|grown| grown.max(l + 1))
                }
            }
            ScheduleKind::Explicit(v) => v.get(l as usize).copied(),
        };
        match value {
            Some(r) => {
                self.l += 1;
                self.prev = r;
                Some(r)
            }
            None => {
                self.failed = true;
                None
            }
        }
    }
}

fn fmt_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        return r.numer().to_string();
    }
    // Terminating decimals print as decimals, everything else as a fraction.
    let mut d = r.denom().clone();
    let twos = d.find_one(0).unwrap_or(0);
    d >>= twos;
    let mut fives = 0u32;
    while d.is_divisible_u(5) {
        d /= 5;
        fives += 1;
    }
    if d == 1 {
        let digits = twos.max(fives);
        let scaled = Rational::from(r * Integer::from(Integer::u_pow_u(10, digits)));
        let n = scaled.numer().clone();
        let neg = n < 0;
        let s = n.abs().to_string();
        let width = digits as usize + 1;
        let s = format!("{s:0>width$}");
        let (ip, fp) = s.split_at(s.len() - digits as usize);
        return format!("{}{}.{}", if neg { "-" } else { "" }, ip, fp);
    }
    format!("{}/{}", r.numer(), r.denom())
}
