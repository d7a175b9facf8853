//! Experiment plans: the figure presets and the runner shared by the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbl::bounds::BlocklengthBounds;
use crate::sim::experiment::{
    compare_policies, policy_config, run_sweep, ExperimentConfig, ExperimentReport, PolicyReport,
    SweepAxis, POLICY_SIGMAS,
};
use crate::types::{LinkParams, PacketSpec};

/// A second parameter drawn as separate curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

fn default_sigmas() -> Vec<f64> {
    POLICY_SIGMAS.to_vec()
}

/// Energy and Shannon underestimation along `axis`, once per series value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub base: ExperimentConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub series: Option<Series>,
}

/// Offline and online schedulers along a σ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyPlan {
    pub base: ExperimentConfig,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
}

/// Blocklength thresholds against ε, one curve per packet size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsPlan {
    pub m_hat: f64,
    pub bits: Vec<f64>,
    pub epsilons: Vec<f64>,
}

/// What `simulate` runs, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExperimentPlan {
    Sweep(SweepPlan),
    Policies(PolicyPlan),
    Bounds(BoundsPlan),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
}

/// ε grid of the underestimation presets.
pub const EPSILON_GRID: [f64; 5] = [5e-2, 5e-3, 5e-4, 5e-5, 5e-6];

impl Preset {
    pub fn plan(self) -> ExperimentPlan {
        let sweep = |series: Series| {
            ExperimentPlan::Sweep(SweepPlan {
                base: ExperimentConfig::default(),
                axis: SweepAxis::Epsilon,
                values: EPSILON_GRID.to_vec(),
                series: Some(series),
            })
        };
        match self {
            Self::Fig2 => ExperimentPlan::Bounds(BoundsPlan {
                m_hat: 200.0,
                bits: vec![4e3, 8e3, 1.2e4, 1.6e4],
                epsilons: (0..=30)
                    .map(|i| 10f64.powf(-1.0 - 0.2 * i as f64))
                    .collect(),
            }),
            Self::Fig4 => sweep(Series {
                axis: SweepAxis::N,
                values: vec![8.0, 10.0, 12.0],
            }),
            Self::Fig5 => sweep(Series {
                axis: SweepAxis::Nu,
                values: vec![4.0, 5.0, 6.0],
            }),
            Self::Fig6 => ExperimentPlan::Policies(PolicyPlan {
                base: policy_config(),
                sigmas: POLICY_SIGMAS.to_vec(),
            }),
        }
    }
}

impl ExperimentPlan {
    /// Overrides the trial counts (`trials × trials`) and the master seed.
    pub fn with_overrides(mut self, trials: Option<usize>, seed: Option<u64>) -> Self {
        if let Self::Sweep(SweepPlan { base, .. }) | Self::Policies(PolicyPlan { base, .. }) =
            &mut self
        {
            if let Some(t) = trials {
                base.channel_realizations = t;
                base.packet_generations = t;
            }
            if let Some(s) = seed {
                base.seed = s;
            }
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |v: &[f64], what: &str| {
            if v.is_empty() {
                Err(Error::InvalidModel(format!("{what} must not be empty")))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Sweep(SweepPlan {
                base,
                axis,
                values,
                series,
            }) => {
                nonempty(values, "values")?;
                let outer: Vec<ExperimentConfig> = match series {
                    Some(s) => {
                        nonempty(&s.values, "series.values")?;
                        s.values.iter().map(|&v| s.axis.apply(base, v)).collect()
                    }
                    None => vec![*base],
                };
                for o in &outer {
                    for &v in values {
                        axis.apply(o, v).validate()?;
                    }
                }
                Ok(())
            }
            Self::Policies(PolicyPlan { base, sigmas }) => {
                nonempty(sigmas, "sigmas")?;
                for &s in sigmas {
                    SweepAxis::Sigma.apply(base, s).validate()?;
                }
                Ok(())
            }
            Self::Bounds(BoundsPlan {
                m_hat,
                bits,
                epsilons,
            }) => {
                nonempty(bits, "bits")?;
                nonempty(epsilons, "epsilons")?;
                LinkParams::new(*m_hat, 1.0, 1.0)?;
                for &b in bits {
                    for &e in epsilons {
                        PacketSpec::new(b, 0.0, 1.0, e, 1.0)?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Reports of one curve of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub series: Option<(SweepAxis, f64)>,
    pub points: Vec<ExperimentReport>,
}

/// Thresholds of one (N, ε) pair. `g_c` is absent when τ is out of range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub bits: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub lower: f64,
    pub g_e: f64,
    pub g_c: Option<f64>,
}

pub fn bounds_rows(m_hat: f64, bits: &[f64], epsilons: &[f64]) -> Result<Vec<BoundsRow>> {
    let link = LinkParams {
        min_blocklength: m_hat,
        ..LinkParams::default()
    };
    let mut out = Vec::with_capacity(bits.len() * epsilons.len());
    for &n in bits {
        for &e in epsilons {
            // The thresholds do not depend on the gain; any positive value works.
            let pkt = PacketSpec::new(n, 0.0, 1.0, e, 1.0)?;
            let b = BlocklengthBounds::compute(&pkt, &link)?;
            out.push(BoundsRow {
                bits: n,
                epsilon: e,
                tau: b.tau,
                lower: link.min_blocklength,
                g_e: b.monotone_upper,
                g_c: b.convex_upper,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanOutput {
    Sweep(Vec<SeriesReport>),
    Policies(Vec<PolicyReport>),
    Bounds(Vec<BoundsRow>),
}

/// Runs `plan`, reporting each finished point through `progress`.
pub fn run_plan(plan: &ExperimentPlan, progress: &mut dyn FnMut(&str)) -> Result<PlanOutput> {
    plan.validate()?;
    match plan {
        ExperimentPlan::Sweep(SweepPlan {
            base,
            axis,
            values,
            series,
        }) => {
            let outer: Vec<(Option<(SweepAxis, f64)>, ExperimentConfig)> = match series {
                Some(s) => s
                    .values
                    .iter()
                    .map(|&v| (Some((s.axis, v)), s.axis.apply(base, v)))
                    .collect(),
                None => vec![(None, *base)],
            };
            let mut out = Vec::with_capacity(outer.len());
            for (label, cfg) in outer {
                let mut points = Vec::with_capacity(values.len());
                for &v in values {
                    let r = run_sweep(&cfg, *axis, &[v])?.remove(0);
                    let prefix = label
                        .map(|(a, x)| format!("{} = {x}, ", a.name()))
                        .unwrap_or_default();
                    progress(&format!(
                        "{prefix}{} = {v}: {:.6} J vs {:.6} J Shannon ({} trials, {} excluded)",
                        axis.name(),
                        r.mean_energy_joules,
                        r.mean_shannon_joules,
                        r.included,
                        r.excluded
                    ));
                    points.push(r);
                }
                out.push(SeriesReport {
                    series: label,
                    points,
                });
            }
            Ok(PlanOutput::Sweep(out))
        }
        ExperimentPlan::Policies(PolicyPlan { base, sigmas }) => {
            let mut out = Vec::with_capacity(sigmas.len());
            for &s in sigmas {
                let r = compare_policies(base, &[s])?.remove(0);
                progress(&format!(
                    "sigma = {s}: offline {:.6} J, rolling window {:.6} J, myopic {:.6} J ({} trials, {} excluded)",
                    r.mean_offline_mlwf, r.mean_rolling_window, r.mean_myopic, r.included, r.excluded
                ));
                out.push(r);
            }
            Ok(PlanOutput::Policies(out))
        }
        ExperimentPlan::Bounds(BoundsPlan {
            m_hat,
            bits,
            epsilons,
        }) => Ok(PlanOutput::Bounds(bounds_rows(*m_hat, bits, epsilons)?)),
    }
}
