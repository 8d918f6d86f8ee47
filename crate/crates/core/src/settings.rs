//! Every numeric default in one place. Reports embed the effective values.
//!
//! | setting | default | used by |
//! |---|---|---|
//! | `integral_tol` | 1e-10 | integrals behind `m`, `M` |
//! | `extremize_tol` | 1e-9 | golden-section refinement of 1-D scans |
//! | `scan_grid` | 256 | grid points of 1-D scans |
//! | `box_density` | 64 | grid points per axis of box scans |
//! | `strictness` | 1e-12 | smallest margin accepted as a strict inequality |
//! | `cap_factor` | 1e3 | unbounded ranges are sampled up to `cap_factor * R` |
//! | `refined_m` | false | use the `k+`/`k-` threshold in place of `m` |
//! | `spectral.n` | 256 | Nyström nodes |
//! | `spectral.tol` | 1e-14 | power iteration stopping tolerance |
//! | `spectral.max_iter` | 100000 | power iteration limit |
//! | `solver.cells` | 128 | solver cells per unit length |
//! | `solver.damping` | 1 | Picard damping |
//! | `solver.picard_tol` | 1e-13 | Picard step tolerance |
//! | `solver.picard_max_iter` | 500 | |
//! | `solver.newton_tol` | 1e-12 | Newton residual tolerance |
//! | `solver.newton_max_iter` | 50 | |
//! | `solver.fd_step` | 1e-7 | finite difference step, scaled by `1 + |x|` |
//! | `solver.dedupe_tol` | 1e-4 | relative to the largest solution norm |
//! | `solver.report_threshold` | 1e-8 | residual below which a solution is reported |
//! | `solver.starts_per_shell` | 2 | multistart seeds per shell |
//! | `phi_mode` | derived | `phi` for two-dimensional annuli |

use serde::{Deserialize, Serialize};

use crate::bounds::ScanOptions;
use crate::radial::PhiMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSettings {
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        SpectralSettings { n: 256, tol: 1e-14, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub cells: usize,
    pub damping: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub fd_step: f64,
    pub dedupe_tol: f64,
    pub report_threshold: f64,
    pub starts_per_shell: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cells: 128,
            damping: 1.0,
            picard_tol: 1e-13,
            picard_max_iter: 500,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            fd_step: 1e-7,
            dedupe_tol: 1e-4,
            report_threshold: 1e-8,
            starts_per_shell: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub integral_tol: f64,
    pub extremize_tol: f64,
    pub scan_grid: usize,
    pub box_density: usize,
    pub strictness: f64,
    pub cap_factor: f64,
    pub refined_m: bool,
    pub phi_mode: PhiMode,
    pub spectral: SpectralSettings,
    pub solver: SolverSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            integral_tol: 1e-10,
            extremize_tol: 1e-9,
            scan_grid: 256,
            box_density: 64,
            strictness: 1e-12,
            cap_factor: 1e3,
            refined_m: false,
            phi_mode: PhiMode::Derived,
            spectral: SpectralSettings::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl Settings {
    pub fn scan(&self) -> ScanOptions {
        ScanOptions { tol: self.integral_tol, grid_n: self.scan_grid, refine_tol: self.extremize_tol }
    }

    /// Rejects values that would make the numerics meaningless.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut pos = |name: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                errs.push(format!("{name} must be positive and finite, got {x}"));
            }
        };
        pos("integral_tol", self.integral_tol);
        pos("extremize_tol", self.extremize_tol);
        pos("strictness", self.strictness);
        pos("cap_factor", self.cap_factor);
        pos("spectral.tol", self.spectral.tol);
        pos("solver.picard_tol", self.solver.picard_tol);
        pos("solver.newton_tol", self.solver.newton_tol);
        pos("solver.fd_step", self.solver.fd_step);
        pos("solver.dedupe_tol", self.solver.dedupe_tol);
        pos("solver.report_threshold", self.solver.report_threshold);
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            errs.push(format!("solver.damping must lie in (0, 1], got {}", self.solver.damping));
        }
        if self.scan_grid < 16 {
            errs.push(format!("scan_grid must be at least 16, got {}", self.scan_grid));
        }
        if self.box_density < 8 {
            errs.push(format!("box_density must be at least 8, got {}", self.box_density));
        }
        if self.spectral.n < 8 {
            errs.push(format!("spectral.n must be at least 8, got {}", self.spectral.n));
        }
        if self.solver.cells < 4 {
            errs.push(format!("solver.cells must be at least 4, got {}", self.solver.cells));
        }
        errs
    }
}
