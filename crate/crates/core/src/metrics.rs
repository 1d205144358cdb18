//! Slow-light figures of merit and the quasi-static window-width sweep.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cavity::{find_modes, transfer, CavityConfig, FieldTransfer, ModeTable};
use crate::error::{invalid, Error, Result};
use crate::grid::FrequencyGrid;
use crate::kk::{group_index_exact, kk_analytic, DispersionProfile};
use crate::profile::{build_background, AbsorptionProfile, BackgroundShape, HoleSpec};
use crate::SPEED_OF_LIGHT;

/// Group velocity estimate `2 pi Gamma / alpha` for a window of width
/// `gamma` (Hz) cut into absorption `alpha` (m^-1).
pub fn vg_eq5(gamma: f64, alpha: f64) -> Result<f64> {
    if !(gamma > 0.0 && alpha > 0.0) {
        return Err(invalid("window width and absorption must be positive"));
    }
    Ok(2.0 * PI * gamma / alpha)
}

/// Delay-bandwidth product `alpha l / 2 pi` of a hole-burning delay line.
pub fn tb_product(alpha: f64, length: f64) -> f64 {
    alpha * length / (2.0 * PI)
}

/// Longitudinal mode spacing `v_g / 2L`.
pub fn mode_spacing_eq1(v_g: f64, length: f64) -> f64 {
    v_g / (2.0 * length)
}

/// Group velocity implied by a ring-down period, `2L / period`.
pub fn vg_from_ringdown(period: f64, length: f64) -> f64 {
    2.0 * length / period
}

/// Absorption just outside a window: the outer limits one ramp width beyond
/// either edge, averaged.
pub fn alpha_eff(profile: &AbsorptionProfile, hole: &HoleSpec) -> f64 {
    let lo = profile.limits(hole.lower_edge() - hole.edge_ramp).0;
    let hi = profile.limits(hole.upper_edge() + hole.edge_ramp).1;
    0.5 * (lo + hi)
}

/// Every stage of the pipeline evaluated on one grid.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub profile: AbsorptionProfile,
    pub alpha: Vec<f64>,
    pub dispersion: DispersionProfile,
    pub transfer: FieldTransfer,
    pub modes: ModeTable,
}

/// profile -> Kramers-Kronig -> cavity transfer -> resonances.
pub fn simulate(
    profile: &AbsorptionProfile,
    grid: &FrequencyGrid,
    cavity: &CavityConfig,
    min_peak_fraction: f64,
) -> Result<Simulation> {
    cavity.validate()?;
    let alpha = profile.sample(grid);
    let dispersion = kk_analytic(profile, grid).with_background_index(cavity.background_index);
    let ft = transfer(cavity, &alpha, &dispersion)?;
    let modes = find_modes(&ft, min_peak_fraction);
    Ok(Simulation {
        profile: profile.clone(),
        alpha,
        dispersion,
        transfer: ft,
        modes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowLightReport {
    /// Window width (Hz).
    pub gamma: f64,
    /// Absorption just outside the window (m^-1).
    pub alpha_eff: f64,
    /// `2 pi Gamma / alpha_eff` (m/s).
    pub v_g_eq5: f64,
    /// `c / n_g` at the window center from the Kramers-Kronig index (m/s).
    pub v_g_kk: f64,
    pub group_index: f64,
    /// Spacing of the resonance pair straddling the window center (Hz).
    pub mode_spacing: f64,
    /// FWHM of the pair member closest to the window center (Hz).
    pub linewidth: f64,
    /// Empty-cavity linewidth over `linewidth`.
    pub narrowing_factor: f64,
    /// Empty-cavity free spectral range over `mode_spacing`.
    pub spacing_reduction_factor: f64,
    /// `alpha_eff L / 2 pi`.
    pub tb_product: f64,
    /// Single-pass delay times window width, `(L / v_g_kk) Gamma`.
    pub tb_delay: f64,
}

impl SlowLightReport {
    pub fn csv_header() -> &'static str {
        "gamma_Hz,alpha_eff_per_m,v_g_eq5_m_per_s,v_g_kk_m_per_s,group_index,mode_spacing_Hz,linewidth_Hz,narrowing_factor,spacing_reduction_factor,tb_product,tb_delay"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            self.gamma,
            self.alpha_eff,
            self.v_g_eq5,
            self.v_g_kk,
            self.group_index,
            self.mode_spacing,
            self.linewidth,
            self.narrowing_factor,
            self.spacing_reduction_factor,
            self.tb_product,
            self.tb_delay
        )
    }
}

/// Report for the window `hole` of a finished simulation.
pub fn report(sim: &Simulation, hole: &HoleSpec, cavity: &CavityConfig) -> Result<SlowLightReport> {
    let carrier = sim.dispersion.grid.carrier();
    let n_g = group_index_exact(&sim.profile, carrier, cavity.background_index, hole.center);
    let v_g_kk = SPEED_OF_LIGHT / n_g;
    let a_eff = alpha_eff(&sim.profile, hole);
    let in_window: Vec<_> = sim
        .modes
        .rows
        .iter()
        .filter(|r| r.center >= hole.lower_edge() && r.center <= hole.upper_edge())
        .cloned()
        .collect();
    let window = ModeTable { rows: in_window };
    let i = window.pair_nearest(hole.center).ok_or_else(|| {
        Error::Analysis(format!(
            "fewer than two resonances inside the {:.3e} Hz window",
            hole.width
        ))
    })?;
    let (a, b) = (&window.rows[i], &window.rows[i + 1]);
    let spacing = b.center - a.center;
    // width of the pair member closest to the window center
    let (near, far) = if (a.center - hole.center).abs() <= (b.center - hole.center).abs() {
        (a, b)
    } else {
        (b, a)
    };
    let linewidth = near
        .fwhm
        .or(far.fwhm)
        .ok_or_else(|| Error::Analysis("window resonances have unbounded width".into()))?;
    Ok(SlowLightReport {
        gamma: hole.width,
        alpha_eff: a_eff,
        v_g_eq5: vg_eq5(hole.width, a_eff)?,
        v_g_kk,
        group_index: n_g,
        mode_spacing: spacing,
        linewidth,
        narrowing_factor: cavity.empty_fwhm() / linewidth,
        spacing_reduction_factor: cavity.empty_fsr() / spacing,
        tb_product: tb_product(a_eff, cavity.length),
        tb_delay: cavity.length / v_g_kk * hole.width,
    })
}

/// Window shape reused across a width sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleTemplate {
    pub background: BackgroundShape,
    /// Background peak absorption (m^-1).
    pub peak_alpha: f64,
    /// Background line width for the gaussian shape (Hz).
    #[serde(default)]
    pub background_fwhm: f64,
    pub center: f64,
    pub residual: f64,
    /// Edge ramp as a fraction of the window width (at most 0.5).
    #[serde(default)]
    pub edge_ramp_fraction: f64,
}

impl HoleTemplate {
    pub fn hole(&self, gamma: f64) -> HoleSpec {
        HoleSpec::ramped(self.center, gamma, self.residual, self.edge_ramp_fraction * gamma)
    }
}

/// Grid and cavity settings shared by every sweep row. Each row gets a grid
/// of `points` samples spanning `span_factor` window widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub carrier: f64,
    pub span_factor: f64,
    pub points: usize,
    pub cavity: CavityConfig,
    pub min_peak_fraction: f64,
}

/// One report per window width; rows are independent (quasi-static tuning)
/// and come back in the order of `gamma_values`.
pub fn tuning_sweep(
    template: &HoleTemplate,
    gamma_values: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<SlowLightReport>> {
    if !(settings.span_factor >= 2.0) {
        return Err(invalid("sweep.span_factor must be at least 2"));
    }
    gamma_values
        .iter()
        .map(|&gamma| {
            if !(gamma > 0.0) {
                return Err(invalid("hole.width must be positive"));
            }
            let span = settings.span_factor * gamma;
            let grid = FrequencyGrid::centered(settings.carrier, template.center, span, settings.points)?;
            let hole = template.hole(gamma);
            // background extends a little past the grid so the hole always fits
            let bg_span = 2.0 * (template.center.abs() + span);
            let profile = build_background(
                template.background,
                template.peak_alpha,
                template.background_fwhm,
                bg_span,
            )?
            .burn_hole(&hole)?;
            let sim = simulate(&profile, &grid, &settings.cavity, settings.min_peak_fraction)?;
            report(&sim, &hole, &settings.cavity)
        })
        .collect()
}
