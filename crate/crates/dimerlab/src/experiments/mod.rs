//! Verification campaigns. Each campaign turns a [`CampaignConfig`] into a
//! table with one row per cell and a list of verdicts, deterministically for
//! fixed seeds.

mod convergence;
mod ensembles;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convergence::{run_bessel_limit, run_ekl_asymptotics, run_gap_convergence, run_kernel_convergence};
pub use ensembles::{peierls_bound, run_backtracking_scan, run_height_stats, run_loop_bound};
pub use table::{format_float, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    KernelConvergence,
    EklAsymptotics,
    GapConvergence,
    BesselLimit,
    HeightStats,
    BacktrackingScan,
    LoopBound,
}

impl Campaign {
    pub const ALL: [Campaign; 7] = [
        Campaign::KernelConvergence,
        Campaign::EklAsymptotics,
        Campaign::GapConvergence,
        Campaign::BesselLimit,
        Campaign::HeightStats,
        Campaign::BacktrackingScan,
        Campaign::LoopBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::KernelConvergence => "kernel-convergence",
            Campaign::EklAsymptotics => "ekl-asymptotics",
            Campaign::GapConvergence => "gap-convergence",
            Campaign::BesselLimit => "bessel-limit",
            Campaign::HeightStats => "height-stats",
            Campaign::BacktrackingScan => "backtracking-scan",
            Campaign::LoopBound => "loop-bound",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Campaign::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown campaign '{s}'")))
    }
}

/// Parameters of one campaign. Fields a campaign does not use are ignored;
/// missing ones fall back to [`CampaignConfig::preset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub campaign: Campaign,
    /// Orders `n`, or the index `m` for the E_{k,l} campaign. Strictly increasing.
    pub ladder: Vec<usize>,
    /// Exponent in `a = n^(gamma - 1)`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// A fixed weight, overriding `gamma`.
    #[serde(default)]
    pub a: Option<f64>,
    /// Bessel-regime parameter with `a n = 4 nu`.
    #[serde(default)]
    pub nu: Option<f64>,
    /// Window points `(alpha, beta)` for kernels, `(t, xi)` for gap events.
    #[serde(default)]
    pub grid: Vec<(f64, f64)>,
    /// Times of the diagonal lines for heights, backtracking and loops.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Even lattice offsets for the Bessel campaign.
    #[serde(default)]
    pub offsets: Vec<i64>,
    /// Loop lengths for the Peierls bound.
    #[serde(default)]
    pub depths: Vec<usize>,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest order handled by the dense oracle; beyond it the contour
    /// formulas are used.
    #[serde(default)]
    pub exact_cap: Option<usize>,
    /// Also count a-dimers inside the central box as backtracking.
    #[serde(default)]
    pub central_box: bool,
    /// Weight of an unasserted control arm.
    #[serde(default)]
    pub control_weight: Option<f64>,
}

const DEFAULT_EXACT_CAP: usize = 32;

impl CampaignConfig {
    fn empty(campaign: Campaign, ladder: Vec<usize>) -> Self {
        Self {
            campaign,
            ladder,
            gamma: None,
            a: None,
            nu: None,
            grid: Vec::new(),
            times: Vec::new(),
            offsets: Vec::new(),
            depths: Vec::new(),
            samples: 0,
            seed: 0,
            exact_cap: None,
            central_box: false,
            control_weight: None,
        }
    }

    /// The default configuration of each campaign.
    pub fn preset(campaign: Campaign) -> Self {
        let unit_grid: Vec<(f64, f64)> = [-1.0, 0.0, 1.0]
            .iter()
            .flat_map(|&a| [-1.0, 0.0, 1.0].map(|b| (a, b)))
            .collect();
        match campaign {
            Campaign::KernelConvergence => Self {
                gamma: Some(0.3),
                grid: unit_grid,
                ..Self::empty(campaign, vec![1024, 2048, 4096])
            },
            Campaign::EklAsymptotics => Self::empty(campaign, vec![200, 800, 3200]),
            Campaign::GapConvergence => Self {
                gamma: Some(0.3),
                grid: vec![(0.0, 0.0)],
                exact_cap: Some(DEFAULT_EXACT_CAP),
                ..Self::empty(campaign, vec![16, 32, 64])
            },
            Campaign::BesselLimit => Self {
                nu: Some(1.0),
                offsets: vec![-2, 0, 2],
                ..Self::empty(campaign, vec![256, 1024, 4096])
            },
            Campaign::HeightStats => Self {
                gamma: Some(0.3),
                times: vec![0.0],
                samples: 10_000,
                seed: 2024,
                ..Self::empty(campaign, vec![32, 64, 128])
            },
            Campaign::BacktrackingScan => Self {
                gamma: Some(0.3),
                times: vec![0.0],
                exact_cap: Some(DEFAULT_EXACT_CAP),
                control_weight: Some(1.0),
                ..Self::empty(campaign, vec![16, 32, 64])
            },
            Campaign::LoopBound => Self {
                a: Some(0.2),
                times: vec![0.0],
                depths: vec![4, 6, 8],
                samples: 10_000,
                seed: 7,
                ..Self::empty(campaign, vec![32])
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn exact_cap(&self) -> usize {
        self.exact_cap.unwrap_or(DEFAULT_EXACT_CAP)
    }

    /// Weight used at order `n`: the fixed weight if given, else `n^(gamma - 1)`.
    pub fn weight(&self, n: usize) -> Result<f64> {
        match (self.a, self.gamma) {
            (Some(a), _) => Ok(a),
            (None, Some(g)) => Ok((n as f64).powf(g - 1.0)),
            (None, None) => Err(Error::InvalidArgument(format!(
                "{} needs either gamma or a",
                self.campaign
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("{}: {msg}", self.campaign)));
        if self.ladder.is_empty() {
            return bad("empty ladder".into());
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("ladder {:?} is not strictly increasing", self.ladder));
        }
        let orders_needed = self.campaign != Campaign::EklAsymptotics;
        if orders_needed && self.ladder.iter().any(|&n| n == 0 || n % 4 != 0) {
            return bad(format!("ladder {:?} contains an order that is not 4m", self.ladder));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0 / 3.0) {
                return bad(format!("gamma = {g} outside (0, 1/3)"));
            }
        }
        if let Some(a) = self.a {
            if !(a.is_finite() && a > 0.0) {
                return bad(format!("weight a = {a} must be positive"));
            }
        }
        match self.campaign {
            Campaign::KernelConvergence | Campaign::GapConvergence => {
                self.weight(self.ladder[0])?;
                if self.grid.is_empty() {
                    return bad("empty grid".into());
                }
                if self.campaign == Campaign::GapConvergence {
                    let mut times: Vec<f64> = self.grid.iter().map(|p| p.0).collect();
                    times.sort_by(f64::total_cmp);
                    if times.windows(2).any(|w| w[0] == w[1]) {
                        return bad("gap-event times must be distinct".into());
                    }
                }
                convergence::check_admissible(self)?;
            }
            Campaign::BesselLimit => {
                if self.nu.is_none_or(|nu| nu <= 0.0) {
                    return bad("nu must be positive".into());
                }
                if self.offsets.is_empty() || self.offsets.iter().any(|p| p % 2 != 0) {
                    return bad("offsets must be non-empty and even".into());
                }
            }
            Campaign::HeightStats => {
                self.weight(self.ladder[0])?;
                if self.samples < 1000 {
                    return bad(format!("{} samples; at least 1000 are needed", self.samples));
                }
                if self.times.is_empty() {
                    return bad("no times".into());
                }
            }
            Campaign::BacktrackingScan => {
                self.weight(self.ladder[0])?;
                if self.times.is_empty() {
                    return bad("no times".into());
                }
            }
            Campaign::LoopBound => {
                match self.a {
                    Some(a) if a < 1.0 / 3.0 => {}
                    _ => return bad("the loop bound needs a fixed weight a < 1/3".into()),
                }
                if self.depths.is_empty() || self.samples == 0 || self.times.is_empty() {
                    return bad("depths, times and samples must be non-empty".into());
                }
            }
            Campaign::EklAsymptotics => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(check: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub table: Table,
    pub verdicts: Vec<Verdict>,
}

impl CampaignReport {
    /// True when no asserted verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    /// The machine-readable verdict document: campaign, config, verdicts
    /// and the overall result (without the table).
    pub fn verdict_json(&self) -> serde_json::Value {
        serde_json::json!({
            "campaign": self.config.campaign,
            "config": self.config,
            "verdicts": self.verdicts,
            "passed": self.passed(),
        })
    }
}

/// Validate and run a campaign.
pub fn run(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    match cfg.campaign {
        Campaign::KernelConvergence => run_kernel_convergence(cfg),
        Campaign::EklAsymptotics => run_ekl_asymptotics(cfg),
        Campaign::GapConvergence => run_gap_convergence(cfg),
        Campaign::BesselLimit => run_bessel_limit(cfg),
        Campaign::HeightStats => run_height_stats(cfg),
        Campaign::BacktrackingScan => run_backtracking_scan(cfg),
        Campaign::LoopBound => run_loop_bound(cfg),
    }
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Whether some strictly decreasing sequence `d_i` fits in the bands
/// `[max(0, e_i - 3 s_i), e_i + 3 s_i]`.
///
/// Greedy from the left: take each `d_i` as large as its band and the
/// previous value allow.
pub fn decreasing_within_bands(estimates: &[f64], sigmas: &[f64]) -> bool {
    let mut prev = f64::INFINITY;
    for (&e, &s) in estimates.iter().zip(sigmas) {
        let lower = (e - 3.0 * s).max(0.0);
        let upper = e + 3.0 * s;
        let candidate = if upper < prev { upper } else { prev - prev.abs().max(1e-300) * 1e-12 };
        if candidate < lower || candidate.is_nan() {
            return false;
        }
        prev = candidate;
    }
    true
}

pub(crate) fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_accept_noisy_but_compatible_sequences() {
        assert!(decreasing_within_bands(&[3.0, 2.0, 1.0], &[0.0, 0.0, 0.0]));
        assert!(!decreasing_within_bands(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]));
        // A small rise inside the noise is compatible with a decrease.
        assert!(decreasing_within_bands(&[1.0, 1.2, 0.5], &[0.1, 0.1, 0.1]));
        assert!(!decreasing_within_bands(&[1.0, 2.0], &[0.1, 0.1]));
        // Equal exact values are not strictly decreasing.
        assert!(!decreasing_within_bands(&[1.0, 1.0], &[0.0, 0.0]));
    }

    #[test]
    fn presets_validate() {
        for c in Campaign::ALL {
            CampaignConfig::preset(c).validate().unwrap();
            assert_eq!(c.name().parse::<Campaign>().unwrap(), c);
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = CampaignConfig::preset(Campaign::HeightStats);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(CampaignConfig::from_json(&text).unwrap(), cfg);
        assert!(CampaignConfig::from_json(r#"{"campaign": "height-stats", "ladder": [64, 32]}"#).is_err());
        assert!(CampaignConfig::from_json(r#"{"campaign": "loop-bound", "ladder": [32], "bogus": 1}"#).is_err());
    }

    #[test]
    fn weight_and_gamma_checks() {
        let mut cfg = CampaignConfig::preset(Campaign::KernelConvergence);
        cfg.gamma = Some(0.4);
        assert!(cfg.validate().is_err());
        let mut cfg = CampaignConfig::preset(Campaign::LoopBound);
        cfg.a = Some(0.5);
        assert!(cfg.validate().is_err());
    }
}
