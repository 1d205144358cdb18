//! Pipeline execution for one scenario configuration.

use serde::Serialize;
use slowcav::cavity::{find_modes, transfer};
use slowcav::kk::kk_analytic;
use slowcav::metrics::{report, tuning_sweep, vg_from_ringdown, HoleTemplate, Simulation, SweepSettings};
use slowcav::pulse::{propagate, ring_down_metrics};
use slowcav::{
    AbsorptionProfile, CavityConfig, DispersionProfile, FieldTransfer, FrequencyGrid, PulseEnvelope,
    RingDown, SlowLightReport,
};

use crate::config::{error_message, ScenarioConfig, Violation};
use crate::error::CliError;

/// Which stages a command needs. Later stages imply the earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Profile,
    Dispersion,
    Spectrum,
    Modes,
    Pulse,
    Sweep,
    All,
}

impl Stage {
    fn needs_dispersion(self) -> bool {
        !matches!(self, Stage::Profile | Stage::Sweep)
    }

    fn needs_transfer(self) -> bool {
        matches!(self, Stage::Spectrum | Stage::Modes | Stage::Pulse | Stage::All)
    }

    fn needs_pulse(self) -> bool {
        matches!(self, Stage::Pulse | Stage::All)
    }

    fn needs_sweep(self) -> bool {
        matches!(self, Stage::Sweep | Stage::All)
    }
}

#[derive(Debug, Clone)]
pub struct PulseRun {
    pub input: PulseEnvelope,
    pub output: PulseEnvelope,
    pub ring_down: RingDown,
}

/// In-memory results of a run; absent stages are `None`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: ScenarioConfig,
    pub grid: FrequencyGrid,
    pub cavity: CavityConfig,
    pub profile: AbsorptionProfile,
    pub alpha: Vec<f64>,
    pub dispersion: Option<DispersionProfile>,
    pub transfer: Option<FieldTransfer>,
    pub simulation: Option<Simulation>,
    /// One entry per configured hole; `Err` holds why no report was possible.
    pub reports: Vec<std::result::Result<SlowLightReport, String>>,
    pub pulse: Option<PulseRun>,
    pub sweep: Option<Vec<SlowLightReport>>,
    pub warnings: Vec<Violation>,
}

fn core_error(e: slowcav::Error) -> CliError {
    match e {
        slowcav::Error::InvalidParameter(m) => CliError::Invalid(vec![Violation {
            field: "config".into(),
            message: m,
        }]),
        slowcav::Error::Analysis(m) => CliError::Runtime(m),
    }
}

/// Validates `config` and runs the stages `stage` needs.
pub fn run(config: &ScenarioConfig, stage: Stage) -> Result<Outcome, CliError> {
    let report_ = config.validate();
    if !report_.is_valid() {
        return Err(CliError::Invalid(report_.errors));
    }
    let grid = config.frequency_grid().map_err(core_error)?;
    let cavity = config.cavity().map_err(core_error)?;
    let profile = config.absorption().map_err(core_error)?;
    let alpha = profile.sample(&grid);

    let mut out = Outcome {
        config: config.clone(),
        grid,
        cavity,
        profile,
        alpha,
        dispersion: None,
        transfer: None,
        simulation: None,
        reports: Vec::new(),
        pulse: None,
        sweep: None,
        warnings: report_.warnings,
    };

    if stage.needs_dispersion() {
        out.dispersion = Some(kk_analytic(&out.profile, &grid).with_background_index(cavity.background_index));
    }
    if stage.needs_transfer() {
        let disp = out.dispersion.clone().expect("dispersion computed");
        let ft = transfer(&cavity, &out.alpha, &disp).map_err(core_error)?;
        let modes = find_modes(&ft, config.modes.min_peak_fraction);
        let sim = Simulation {
            profile: out.profile.clone(),
            alpha: out.alpha.clone(),
            dispersion: disp,
            transfer: ft.clone(),
            modes,
        };
        out.reports = config
            .profile
            .holes
            .iter()
            .map(|h| report(&sim, &h.spec(), &cavity).map_err(|e| error_message(&e)))
            .collect();
        out.transfer = Some(ft);
        out.simulation = Some(sim);
    }
    if stage.needs_pulse() {
        if let Some(spec) = &config.pulse {
            let input = spec.envelope().map_err(core_error)?;
            let ft = out.transfer.as_ref().expect("transfer computed");
            let output = propagate(&input, ft).map_err(core_error)?;
            let ring_down = ring_down_metrics(&output);
            out.pulse = Some(PulseRun {
                input,
                output,
                ring_down,
            });
        } else if stage == Stage::Pulse {
            return Err(CliError::Invalid(vec![Violation {
                field: "pulse".into(),
                message: "pulse section is required for this command".into(),
            }]));
        }
    }
    if stage.needs_sweep() {
        if let Some(s) = &config.sweep {
            let b = &config.profile.background;
            let template = HoleTemplate {
                background: b.shape,
                peak_alpha: b.peak_alpha_per_m,
                background_fwhm: b.fwhm_hz,
                center: s.center_hz,
                residual: s.residual_per_m,
                edge_ramp_fraction: s.edge_ramp_fraction,
            };
            let settings = SweepSettings {
                carrier: config.carrier(),
                span_factor: s.span_factor,
                points: s.points,
                cavity,
                min_peak_fraction: config.modes.min_peak_fraction,
            };
            out.sweep = Some(tuning_sweep(&template, &s.widths_hz, &settings).map_err(core_error)?);
        } else if stage == Stage::Sweep {
            return Err(CliError::Invalid(vec![Violation {
                field: "sweep".into(),
                message: "sweep section is required for this command".into(),
            }]));
        }
    }
    Ok(out)
}

/// Modes whose centers fall inside one hole.
#[derive(Debug, Clone, Serialize)]
pub struct WindowSummary {
    pub hole: usize,
    pub lower_edge_hz: f64,
    pub upper_edge_hz: f64,
    pub mode_count: usize,
    pub mean_spacing_hz: Option<f64>,
    pub mean_fwhm_hz: Option<f64>,
    pub mode_numbers: Vec<i64>,
    pub max_order_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RingDownSummary {
    pub peak_count: usize,
    pub period_s: Option<f64>,
    pub amplitude_ratio: Option<f64>,
    pub group_velocity_m_per_s: Option<f64>,
    /// Group velocity times the input intensity FWHM.
    pub compressed_length_m: Option<f64>,
}

/// Deterministic digest of a run, written as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub grid_step_hz: f64,
    pub empty_fsr_hz: f64,
    pub empty_fwhm_hz: f64,
    pub excess_roundtrip: f64,
    pub round_trip_intensity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_count: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<WindowSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring_down: Option<RingDownSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Violation>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl Outcome {
    pub fn windows(&self) -> Vec<WindowSummary> {
        let Some(sim) = &self.simulation else {
            return Vec::new();
        };
        self.config
            .profile
            .holes
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let spec = h.spec();
                let rows = sim.modes.within(spec.lower_edge(), spec.upper_edge());
                let spacings: Vec<f64> = rows.windows(2).map(|w| w[1].center - w[0].center).collect();
                let widths: Vec<f64> = rows.iter().filter_map(|r| r.fwhm).collect();
                WindowSummary {
                    hole: i,
                    lower_edge_hz: spec.lower_edge(),
                    upper_edge_hz: spec.upper_edge(),
                    mode_count: rows.len(),
                    mean_spacing_hz: mean(&spacings),
                    mean_fwhm_hz: mean(&widths),
                    mode_numbers: rows.iter().map(|r| r.mode_number).collect(),
                    max_order_residual: rows.iter().map(|r| r.residual()).reduce(f64::max),
                }
            })
            .collect()
    }

    pub fn ring_down_summary(&self) -> Option<RingDownSummary> {
        let p = self.pulse.as_ref()?;
        let v_g = p
            .ring_down
            .period
            .map(|t| vg_from_ringdown(t, self.cavity.length));
        let fwhm = p.input.intensity_fwhm();
        Some(RingDownSummary {
            peak_count: p.ring_down.peak_times.len(),
            period_s: p.ring_down.period,
            amplitude_ratio: p.ring_down.amplitude_ratio,
            group_velocity_m_per_s: v_g,
            compressed_length_m: v_g.zip(fwhm).map(|(v, w)| v * w),
        })
    }

    pub fn summary(&self) -> Summary {
        Summary {
            scenario: self.config.name.clone(),
            grid_step_hz: self.grid.step(),
            empty_fsr_hz: self.cavity.empty_fsr(),
            empty_fwhm_hz: self.cavity.empty_fwhm(),
            excess_roundtrip: self.cavity.excess_roundtrip,
            round_trip_intensity: self.cavity.round_trip_intensity(),
            mode_count: self.simulation.as_ref().map(|s| s.modes.len()),
            windows: self.windows(),
            reports: self
                .reports
                .iter()
                .map(|r| match r {
                    Ok(rep) => serde_json::to_value(rep).expect("report serializes"),
                    Err(m) => serde_json::json!({ "error": m }),
                })
                .collect(),
            ring_down: self.ring_down_summary(),
            warnings: self.warnings.clone(),
        }
    }
}
