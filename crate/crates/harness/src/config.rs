//! TOML case files and command-line overrides.

use std::path::Path;

use serde::Deserialize;

use crate::cases::{CaseId, CaseSpec, Scheme};
use crate::error::{HarnessError, Result};

/// Any subset of `CaseSpec` fields; unset values keep the case defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub case: Option<CaseId>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub active: Option<bool>,
    pub dt_coeff: Option<f64>,
    pub eta_dt: Option<f64>,
    pub h_dx: Option<f64>,
    pub eta: Option<f64>,
    pub h: Option<f64>,
    pub l: Option<f64>,
    pub t_final: Option<f64>,
    pub c_f: Option<f64>,
    pub omega0: Option<f64>,
    pub amplitude: Option<f64>,
    pub scheme: Option<Scheme>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Values set in `other` win.
    pub fn merge(self, other: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            case, n, m, active, dt_coeff, eta_dt, h_dx, eta, h, l, t_final, c_f, omega0, amplitude,
            scheme
        )
    }

    pub fn apply(&self, mut spec: CaseSpec) -> CaseSpec {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { spec.$f = v; })* };
        }
        set!(n, m, active, dt_coeff, eta_dt, h_dx, l, t_final, omega0, amplitude, scheme);
        if self.eta.is_some() {
            spec.eta = self.eta;
        }
        if self.h.is_some() {
            spec.h = self.h;
        }
        if self.c_f.is_some() {
            spec.c_f = self.c_f;
        }
        spec
    }

    /// Resolves the case from `case` (or the file), then applies every override.
    pub fn resolve(&self, case: Option<CaseId>) -> Result<CaseSpec> {
        let id = case
            .or(self.case)
            .ok_or_else(|| HarnessError::Config("no case given".into()))?;
        Ok(self.apply(CaseSpec::defaults(id)))
    }
}
