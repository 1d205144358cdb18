//! Scenario configuration document.
//!
//! Units: frequencies and detunings in Hz, lengths in m, absorption in m^-1,
//! times in s. Every field with a default may be omitted.

use serde::{Deserialize, Serialize};
use slowcav::cavity::{calibrate_excess_loss, EMPTY_CAVITY_LINEWIDTH};
use slowcav::profile::build_background;
use slowcav::pulse::gaussian_pulse;
use slowcav::{
    AbsorptionProfile, BackgroundShape, CavityConfig, FrequencyGrid, HoleSpec, PulseEnvelope,
    DEFAULT_BACKGROUND_INDEX, DEFAULT_CARRIER,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Free text describing what the scenario reproduces.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub comment: String,
    pub grid: GridSpec,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub cavity: CavitySpec,
    #[serde(default)]
    pub modes: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub export: ExportSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Optical carrier; defaults to the 605.976 nm transition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_hz: Option<f64>,
    #[serde(default)]
    pub center_hz: f64,
    pub span_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub background: BackgroundSpec,
    #[serde(default)]
    pub holes: Vec<HoleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub shape: BackgroundShape,
    pub peak_alpha_per_m: f64,
    /// Line width of the gaussian shape.
    #[serde(default)]
    pub fwhm_hz: f64,
    /// Breakpoint span of the background; defaults to four grid spans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub center_hz: f64,
    pub width_hz: f64,
    #[serde(default)]
    pub residual_per_m: f64,
    #[serde(default)]
    pub edge_ramp_hz: f64,
}

impl HoleConfig {
    pub fn spec(&self) -> HoleSpec {
        HoleSpec::ramped(self.center_hz, self.width_hz, self.residual_per_m, self.edge_ramp_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    pub length_m: f64,
    pub r1: f64,
    pub r2: f64,
    pub background_index: f64,
    /// Excess round-trip factor; when absent it is calibrated so the empty
    /// cavity linewidth equals `empty_linewidth_hz`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excess_roundtrip: Option<f64>,
    #[serde(default = "default_empty_linewidth")]
    pub empty_linewidth_hz: f64,
}

fn default_empty_linewidth() -> f64 {
    EMPTY_CAVITY_LINEWIDTH
}

impl Default for CavitySpec {
    fn default() -> Self {
        Self {
            length_m: 6e-3,
            r1: 0.95,
            r2: 0.95,
            background_index: DEFAULT_BACKGROUND_INDEX,
            excess_roundtrip: None,
            empty_linewidth_hz: EMPTY_CAVITY_LINEWIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    #[serde(default = "default_min_peak_fraction")]
    pub min_peak_fraction: f64,
    /// Narrowest linewidth the grid should resolve; a coarser grid warns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_linewidth_hz: Option<f64>,
}

fn default_min_peak_fraction() -> f64 {
    0.01
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self {
            min_peak_fraction: default_min_peak_fraction(),
            target_linewidth_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub fwhm_s: f64,
    #[serde(default)]
    pub center_s: f64,
    pub time_span_s: f64,
    pub samples: usize,
}

impl PulseSpec {
    pub fn envelope(&self) -> slowcav::Result<PulseEnvelope> {
        gaussian_pulse(self.fwhm_s, self.center_s, self.time_span_s, self.samples)
    }
}

/// Window-width sweep. Each row burns one hole of the listed width into the
/// configured background, centered at `center_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub widths_hz: Vec<f64>,
    #[serde(default)]
    pub center_hz: f64,
    #[serde(default)]
    pub residual_per_m: f64,
    #[serde(default)]
    pub edge_ramp_fraction: f64,
    pub span_factor: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSpec {
    /// Only grid points inside `[lo, hi]` are written to spectral tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_hz: Option<[f64; 2]>,
    /// Write every `stride`-th point of spectral and pulse tables.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for ExportSpec {
    fn default() -> Self {
        Self {
            window_hz: None,
            stride: 1,
        }
    }
}

/// One violated invariant, tagged with the config path that caused it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn carrier(&self) -> f64 {
        self.grid.carrier_hz.unwrap_or(DEFAULT_CARRIER)
    }

    pub fn frequency_grid(&self) -> slowcav::Result<FrequencyGrid> {
        FrequencyGrid::centered(self.carrier(), self.grid.center_hz, self.grid.span_hz, self.grid.points)
    }

    pub fn background_span(&self) -> f64 {
        self.profile
            .background
            .span_hz
            .unwrap_or(4.0 * self.grid.span_hz + 2.0 * self.grid.center_hz.abs())
    }

    pub fn background(&self) -> slowcav::Result<AbsorptionProfile> {
        let b = &self.profile.background;
        build_background(b.shape, b.peak_alpha_per_m, b.fwhm_hz, self.background_span())
    }

    /// Background with every configured hole burned in order.
    pub fn absorption(&self) -> slowcav::Result<AbsorptionProfile> {
        self.profile
            .holes
            .iter()
            .try_fold(self.background()?, |p, h| p.burn_hole(&h.spec()))
    }

    pub fn cavity(&self) -> slowcav::Result<CavityConfig> {
        let c = &self.cavity;
        let excess_roundtrip = match c.excess_roundtrip {
            Some(a) => a,
            None => calibrate_excess_loss(c.length_m, c.r1, c.r2, c.background_index, c.empty_linewidth_hz)?,
        };
        let cfg = CavityConfig {
            length: c.length_m,
            r1: c.r1,
            r2: c.r2,
            background_index: c.background_index,
            excess_roundtrip,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every violated invariant plus advisory warnings. Nothing is simulated.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let mut err = |f: &str, m: &str| r.errors.push(Violation::new(f, m));

        if self.name.trim().is_empty() {
            err("name", "name must not be empty");
        }

        let g = &self.grid;
        let mut grid_ok = true;
        if let Some(c) = g.carrier_hz {
            if !positive(c) {
                err("grid.carrier_hz", "grid.carrier_hz must be positive");
                grid_ok = false;
            }
        }
        if !g.center_hz.is_finite() {
            err("grid.center_hz", "grid.center_hz must be finite");
            grid_ok = false;
        }
        if !positive(g.span_hz) {
            err("grid.span_hz", "grid.span_hz must be positive");
            grid_ok = false;
        }
        if g.points < 4 || !g.points.is_multiple_of(2) {
            err("grid.points", "grid.points must be even and at least 4");
            grid_ok = false;
        }
        if grid_ok {
            if let Err(e) = self.frequency_grid() {
                err("grid", &error_message(&e));
            }
        }

        let b = &self.profile.background;
        let mut bg_ok = true;
        if !(b.peak_alpha_per_m.is_finite() && b.peak_alpha_per_m >= 0.0) {
            err("profile.background.peak_alpha_per_m", "background.peak_alpha must be non-negative");
            bg_ok = false;
        }
        if b.shape == BackgroundShape::Gaussian && !positive(b.fwhm_hz) {
            err("profile.background.fwhm_hz", "background.fwhm must be positive");
            bg_ok = false;
        }
        if let Some(s) = b.span_hz {
            if !positive(s) {
                err("profile.background.span_hz", "background.span must be positive");
                bg_ok = false;
            }
        }
        let mut holes_ok = true;
        for (i, h) in self.profile.holes.iter().enumerate() {
            for m in h.spec().violations() {
                let field = match m.split(' ').next().unwrap_or("") {
                    "hole.center" => "center_hz",
                    "hole.width" => "width_hz",
                    "hole.residual" => "residual_per_m",
                    _ => "edge_ramp_hz",
                };
                err(&format!("profile.holes[{i}].{field}"), &m);
                holes_ok = false;
            }
        }
        if bg_ok && holes_ok && grid_ok {
            // burn one hole at a time so a failure names the hole
            match self.background() {
                Ok(mut p) => {
                    for (i, h) in self.profile.holes.iter().enumerate() {
                        match p.burn_hole(&h.spec()) {
                            Ok(q) => p = q,
                            Err(e) => {
                                err(&format!("profile.holes[{i}]"), &error_message(&e));
                                break;
                            }
                        }
                    }
                }
                Err(e) => err("profile.background", &error_message(&e)),
            }
        }

        let c = &self.cavity;
        let cavity_preview = CavityConfig {
            length: c.length_m,
            r1: c.r1,
            r2: c.r2,
            background_index: c.background_index,
            excess_roundtrip: c.excess_roundtrip.unwrap_or(1.0),
        };
        let cavity_errors = cavity_preview.violations();
        for m in &cavity_errors {
            let field = m.split(' ').next().unwrap_or("cavity");
            let field = match field {
                "cavity.length" => "cavity.length_m",
                f => f,
            };
            err(field, m);
        }
        if cavity_errors.is_empty() && c.excess_roundtrip.is_none() {
            if let Err(e) = self.cavity() {
                err("cavity.empty_linewidth_hz", &error_message(&e));
            }
        }

        if !(self.modes.min_peak_fraction > 0.0 && self.modes.min_peak_fraction < 1.0) {
            err("modes.min_peak_fraction", "modes.min_peak_fraction must lie in (0, 1)");
        }
        if let Some(t) = self.modes.target_linewidth_hz {
            if !positive(t) {
                err("modes.target_linewidth_hz", "modes.target_linewidth_hz must be positive");
            }
        }

        if let Some(p) = &self.pulse {
            if let Err(e) = p.envelope() {
                let msg = error_message(&e);
                let field = msg
                    .split(' ')
                    .next()
                    .filter(|f| f.starts_with("pulse."))
                    .map(|f| match f {
                        "pulse.fwhm" => "pulse.fwhm_s",
                        "pulse.time_span" => "pulse.time_span_s",
                        "pulse.center" => "pulse.center_s",
                        f => f,
                    })
                    .unwrap_or("pulse")
                    .to_string();
                err(&field, &msg);
            }
        }

        if let Some(s) = &self.sweep {
            if s.widths_hz.is_empty() {
                err("sweep.widths_hz", "sweep.widths_hz must not be empty");
            }
            if s.widths_hz.iter().any(|w| !positive(*w)) {
                err("sweep.widths_hz", "hole.width must be positive");
            }
            if !(s.span_factor.is_finite() && s.span_factor >= 2.0) {
                err("sweep.span_factor", "sweep.span_factor must be at least 2");
            }
            if s.points < 4 || s.points % 2 != 0 {
                err("sweep.points", "sweep.points must be even and at least 4");
            }
            if !(s.residual_per_m.is_finite() && s.residual_per_m >= 0.0) {
                err("sweep.residual_per_m", "hole.residual must be non-negative");
            }
            if !(s.edge_ramp_fraction >= 0.0 && s.edge_ramp_fraction <= 0.5) {
                err("sweep.edge_ramp_fraction", "sweep.edge_ramp_fraction must lie in [0, 0.5]");
            }
        }

        if self.export.stride == 0 {
            err("export.stride", "export.stride must be at least 1");
        }
        if let Some([lo, hi]) = self.export.window_hz {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                err("export.window_hz", "export.window_hz must be an increasing pair");
            }
        }
        if self.output_dir.trim().is_empty() {
            err("output_dir", "output_dir must not be empty");
        }

        if grid_ok {
            if let (Some(t), Ok(grid)) = (self.modes.target_linewidth_hz, self.frequency_grid()) {
                if grid.step() > t / 10.0 {
                    r.warnings.push(Violation::new(
                        "grid.points",
                        format!(
                            "grid step {:.3e} Hz is coarser than a tenth of the target linewidth {:.3e} Hz",
                            grid.step(),
                            t
                        ),
                    ));
                }
            }
        }
        r
    }
}

/// Core error text without the variant prefix.
pub fn error_message(e: &slowcav::Error) -> String {
    match e {
        slowcav::Error::InvalidParameter(m) | slowcav::Error::Analysis(m) => m.clone(),
    }
}
