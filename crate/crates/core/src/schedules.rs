//! Momentum parameter sequences `(t_k)` and the inertial coefficients
//! `α_k = (t_k − 1)/t_{k+1}` they induce.
//!
//! Two admissibility conditions are checked:
//! - the FISTA conditions: `t_0 = 1`, `t_k ≥ (k+2)/2` and `t_k² ≥ t_{k+1}² − t_{k+1}`;
//! - the increment condition: `t_{k+1}² − t_k² ≤ t_{k+1}`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Slack used by the validators.
pub const VALIDATION_SLACK: f64 = 1e-12;

/// Horizon over which built-in schedules are validated.
pub const VALIDATION_HORIZON: usize = 10_000;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ScheduleFamily {
    /// `t_{k+1} = (1 + √(1 + 4t_k²))/2`.
    ClassicalFista,
    /// `t_{k+1} = 1 + k/(α − 1)`, `α ≥ 3`.
    ChambolleDossal { alpha: f64 },
    /// Positive root of `t_{k+1}² − t_k² = (1−θ)t_{k+1} + θt_k`, `θ ∈ [0, 1)`.
    ThetaFamily { theta: f64 },
    /// `t_k = (k + 2)/2`, so `α_k = k/(k + 3)`.
    LinearHalf,
    /// Explicit finite list of `t` values.
    Custom { values: Arc<[f64]> },
}

/// A parameter-sequence description. Generate values with [`Schedule::sequence`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Schedule {
    family: ScheduleFamily,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            ScheduleFamily::ClassicalFista => write!(f, "fista"),
            ScheduleFamily::ChambolleDossal { alpha } => write!(f, "chambolle-dossal:{alpha}"),
            ScheduleFamily::ThetaFamily { theta } => write!(f, "theta:{theta}"),
            ScheduleFamily::LinearHalf => write!(f, "linear-half"),
            ScheduleFamily::Custom { values } => write!(f, "custom({} values)", values.len()),
        }
    }
}

pub fn classical_fista() -> Schedule {
    Schedule {
        family: ScheduleFamily::ClassicalFista,
    }
}

pub fn linear_half() -> Schedule {
    Schedule {
        family: ScheduleFamily::LinearHalf,
    }
}

pub fn chambolle_dossal(alpha: f64) -> Result<Schedule> {
    if !(alpha >= 3.0) || !alpha.is_finite() {
        return Err(Error::Schedule(format!(
            "chambolle-dossal requires alpha >= 3, got {alpha}"
        )));
    }
    Ok(Schedule {
        family: ScheduleFamily::ChambolleDossal { alpha },
    })
}

pub fn theta_family(theta: f64) -> Result<Schedule> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Schedule(format!(
            "theta-family requires theta in [0, 1), got {theta}"
        )));
    }
    Ok(Schedule {
        family: ScheduleFamily::ThetaFamily { theta },
    })
}

impl Schedule {
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Schedule("custom schedule is empty".into()));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Schedule(format!(
                "custom schedule value t_{k} = {v} is not a positive number"
            )));
        }
        Ok(Schedule {
            family: ScheduleFamily::Custom {
                values: values.into(),
            },
        })
    }

    /// Loads a one-column CSV of `t` values. Lines starting with `#` and a
    /// non-numeric header line are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let field = line.split(',').next().unwrap_or("").trim();
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if values.is_empty() && lineno == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse(format!(
                        "{}:{}: not a number: {field:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Self::custom(values)
    }

    pub fn family(&self) -> &ScheduleFamily {
        &self.family
    }

    /// Fresh memoized generator for one solver run.
    pub fn sequence(&self) -> ParameterSequence {
        ParameterSequence {
            family: self.family.clone(),
            values: vec![1.0],
        }
    }

    /// Checks both admissibility conditions over `horizon` steps (or the whole
    /// list for custom schedules).
    pub fn admissibility(&self, horizon: usize) -> Admissibility {
        let ts = match &self.family {
            ScheduleFamily::Custom { values } => values.to_vec(),
            _ => {
                let mut seq = self.sequence();
                (0..=horizon + 1).map(|k| seq.t(k).expect("built-in is unbounded")).collect()
            }
        };
        validate(&ts)
    }
}

/// Memoized `t_k` / `α_k` generator, owned by a single run.
#[derive(Debug, Clone)]
pub struct ParameterSequence {
    family: ScheduleFamily,
    values: Vec<f64>,
}

impl ParameterSequence {
    /// `t_k`; `None` past the end of a custom list.
    pub fn t(&mut self, k: usize) -> Option<f64> {
        if let ScheduleFamily::Custom { values } = &self.family {
            return values.get(k).copied();
        }
        while self.values.len() <= k {
            let j = self.values.len() - 1;
            let tj = self.values[j];
            let next = match &self.family {
                ScheduleFamily::ClassicalFista => (1.0 + (1.0 + 4.0 * tj * tj).sqrt()) / 2.0,
                ScheduleFamily::ChambolleDossal { alpha } => 1.0 + j as f64 / (alpha - 1.0),
                ScheduleFamily::ThetaFamily { theta } => {
                    let a = 1.0 - theta;
                    (a + (a * a + 4.0 * (tj * tj + theta * tj)).sqrt()) / 2.0
                }
                ScheduleFamily::LinearHalf => (j + 3) as f64 / 2.0,
                ScheduleFamily::Custom { .. } => unreachable!(),
            };
            self.values.push(next);
        }
        Some(self.values[k])
    }

    /// `α_k = (t_k − 1)/t_{k+1}`.
    pub fn alpha(&mut self, k: usize) -> Option<f64> {
        let tk = self.t(k)?;
        let tk1 = self.t(k + 1)?;
        Some((tk - 1.0) / tk1)
    }
}

/// First index where a condition fails.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Violation {
    pub index: usize,
    pub condition: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `t_0 = 1`.
    StartsAtOne,
    /// `t_k ≥ (k + 2)/2`.
    LinearGrowth,
    /// `t_k² ≥ t_{k+1}² − t_{k+1}`.
    QuadraticStep,
    /// `t_{k+1}² − t_k² ≤ t_{k+1}`.
    Increment,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Admissibility {
    /// `None` when the FISTA conditions hold on the checked range.
    pub fista_conditions: Option<Violation>,
    /// `None` when the increment condition holds on the checked range.
    pub increment_condition: Option<Violation>,
    pub checked: usize,
}

impl Admissibility {
    pub fn satisfies_fista_conditions(&self) -> bool {
        self.fista_conditions.is_none()
    }

    /// Admissible for an APG run: one of the two conditions holds.
    pub fn is_admissible(&self) -> bool {
        self.fista_conditions.is_none() || self.increment_condition.is_none()
    }
}

/// Checks a finite list of `t` values against both conditions, reporting the
/// first violating index of each.
pub fn validate(ts: &[f64]) -> Admissibility {
    let s = VALIDATION_SLACK;
    let mut fista = None;
    let mut increment = None;
    match ts.first() {
        Some(&t0) if (t0 - 1.0).abs() <= s => {}
        _ => {
            let v = Violation {
                index: 0,
                condition: Condition::StartsAtOne,
            };
            fista = Some(v);
            increment = Some(v);
        }
    }
    for (k, &tk) in ts.iter().enumerate() {
        if fista.is_none() && tk < (k as f64 + 2.0) / 2.0 - s {
            fista = Some(Violation {
                index: k,
                condition: Condition::LinearGrowth,
            });
        }
        if let Some(&tk1) = ts.get(k + 1) {
            if fista.is_none() && tk * tk < tk1 * tk1 - tk1 - s * (1.0 + tk1 * tk1) {
                fista = Some(Violation {
                    index: k,
                    condition: Condition::QuadraticStep,
                });
            }
            if increment.is_none() && tk1 * tk1 - tk * tk > tk1 + s * (1.0 + tk1 * tk1) {
                increment = Some(Violation {
                    index: k,
                    condition: Condition::Increment,
                });
            }
        }
        if fista.is_some() && increment.is_some() {
            break;
        }
    }
    Admissibility {
        fista_conditions: fista,
        increment_condition: increment,
        checked: ts.len(),
    }
}
