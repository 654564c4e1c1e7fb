//! The JSON result document.
//!
//! Field order follows the struct declarations. Every float is written with
//! 17 significant digits so that parsing the document back yields the same
//! bits, and non-finite values become `null`.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(f64);

pub fn num(v: f64) -> Num {
    Num(v)
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(Num).collect()
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw =
            RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Serialize)]
pub struct Feasibility {
    pub max_load: Option<Num>,
    pub min_column_load: Option<Num>,
    pub pre_scale_min_column_load: Option<Num>,
    pub violated: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Params {
    pub beta: Num,
    pub beta_prime: Option<Num>,
    pub h: Option<Num>,
    #[serde(rename = "K")]
    pub k: u64,
    pub log_c: Num,
}

#[derive(Debug, Serialize)]
pub struct Guarantee {
    pub form: &'static str,
    pub eps_f: Num,
    pub bound: Num,
    pub note: &'static str,
}

#[derive(Debug, Default, Serialize)]
pub struct Dual {
    pub y: Option<Vec<Num>>,
    pub gap: Option<Num>,
    pub slackness: Option<Num>,
    pub y_avg: Option<Vec<Num>>,
    pub cost_avg: Option<Num>,
    pub x: Option<Vec<Num>>,
}

#[derive(Debug, Serialize)]
pub struct Scaling {
    pub scale: Num,
    pub rho: Num,
}

#[derive(Debug, Serialize)]
pub struct Locality {
    pub rounds: u64,
    pub reads: u64,
    pub out_of_column: u64,
}

#[derive(Debug, Serialize)]
pub struct RunResult {
    pub mode: &'static str,
    pub engine: &'static str,
    pub fairness: Num,
    pub epsilon: Num,
    pub solution: Vec<Num>,
    pub objective: Num,
    pub feasible: bool,
    pub feasibility: Feasibility,
    pub iterations: u64,
    pub stopped_early: bool,
    pub params: Params,
    pub guarantee: Guarantee,
    pub dual: Dual,
    pub scaling: Scaling,
    pub locality: Option<Locality>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: Num,
}

impl RunResult {
    pub fn new(mode: &'static str) -> Self {
        let zero = Num(0.0);
        RunResult {
            mode,
            engine: "monolithic",
            fairness: zero,
            epsilon: zero,
            solution: Vec::new(),
            objective: zero,
            feasible: false,
            feasibility: Feasibility {
                max_load: None,
                min_column_load: None,
                pre_scale_min_column_load: None,
                violated: Vec::new(),
            },
            iterations: 0,
            stopped_early: false,
            params: Params {
                beta: zero,
                beta_prime: None,
                h: None,
                k: 0,
                log_c: zero,
            },
            guarantee: Guarantee {
                form: "",
                eps_f: zero,
                bound: zero,
                note: "evaluated with the returned objective in place of the unknown optimum",
            },
            dual: Dual::default(),
            scaling: Scaling {
                scale: Num(1.0),
                rho: Num(1.0),
            },
            locality: None,
            warnings: Vec::new(),
            wall_clock_seconds: zero,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}
