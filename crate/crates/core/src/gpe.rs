//! Spherically symmetric Gross–Pitaevskii ground state by imaginary-time
//! propagation.
//!
//! Works with u(r) = r·ξ(r) on a uniform grid r_j = j·h, j = 1..J, with
//! u(0) = u(r_max) = 0, in oscillator units (length ā = √(ħ/mω̄), energy ħω̄).
//! The density is N|ξ|² with 4π∫r²|ξ|²dr = 1, so the dimensionless equation is
//!
//! ```text
//! −u''/2 + r²u/2 + β(u/r)²u = μu,   β = 4πNa/ā
//! ```
//!
//! Each step is an explicit Euler step of ∂u/∂τ = −Hu followed by
//! renormalization, with Δτ·λ_max ≤ 0.9 so that the energy cannot increase.
//! Anisotropic traps are replaced by their geometric-mean frequency.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::model::{PhysicalConstants, Species, Trap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpeGrid {
    /// Interior grid points.
    pub points: usize,
    /// Outer radius in oscillator lengths; `None` picks max(1.6·R_TF, 8).
    pub r_max: Option<f64>,
    pub max_iterations: usize,
    /// Convergence: relative change of μ over one unit of imaginary time.
    pub tolerance: f64,
}

impl Default for GpeGrid {
    fn default() -> Self {
        Self {
            points: 600,
            r_max: None,
            max_iterations: 20_000_000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpeGroundState {
    /// Radii, m.
    pub r: Vec<f64>,
    /// ξ(r), m^{-3/2}.
    pub xi: Vec<f64>,
    /// J
    pub mu_gpe: f64,
    pub atom_count: f64,
    pub iterations: usize,
    /// ‖Hu − μu‖ at exit, in oscillator units.
    pub residual: f64,
    /// No step increased the energy functional.
    pub energy_monotone: bool,
    /// Oscillator length ā, m.
    pub osc_length: f64,
    /// ħω̄, J.
    pub osc_energy: f64,
    grid_step: f64,
    u: Vec<f64>,
}

struct Radial {
    h: f64,
    r: Vec<f64>,
    beta: f64,
}

impl Radial {
    /// 4π∫u² dr
    fn norm(&self, u: &[f64]) -> f64 {
        4.0 * std::f64::consts::PI * u.iter().map(|x| x * x).sum::<f64>() * self.h
    }

    /// Hu, with u = 0 outside the grid.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        for j in 0..n {
            let left = if j == 0 { 0.0 } else { u[j - 1] };
            let right = if j + 1 == n { 0.0 } else { u[j + 1] };
            let r = self.r[j];
            let dens = u[j] / r;
            out[j] = -0.5 * (left - 2.0 * u[j] + right) * inv_h2
                + 0.5 * r * r * u[j]
                + self.beta * dens * dens * u[j];
        }
    }

    /// (energy functional, μ) for normalized u.
    fn energy_and_mu(&self, u: &[f64]) -> (f64, f64) {
        let n = u.len();
        let mut kin = 0.0;
        let mut pot = 0.0;
        let mut int = 0.0;
        for j in 0..=n {
            let a = if j == 0 { 0.0 } else { u[j - 1] };
            let b = if j == n { 0.0 } else { u[j] };
            kin += (b - a) * (b - a);
        }
        for j in 0..n {
            let r = self.r[j];
            pot += r * r * u[j] * u[j];
            let d = u[j] / r;
            int += d * d * u[j] * u[j];
        }
        let four_pi = 4.0 * std::f64::consts::PI;
        let kin = four_pi * 0.5 * kin / self.h;
        let pot = four_pi * 0.5 * pot * self.h;
        let int = four_pi * self.beta * int * self.h;
        (kin + pot + 0.5 * int, kin + pot + int)
    }
}

/// Thomas–Fermi μ in units of ħω̄.
fn mu_tf_osc(beta: f64) -> f64 {
    // μ = ½(15Na/ā)^{2/5} and Na/ā = β/(4π)
    0.5 * (15.0 * beta / (4.0 * std::f64::consts::PI)).powf(0.4)
}

pub fn gpe_ground_state(
    n: f64,
    species: &Species<f64>,
    trap: &Trap<f64>,
    constants: &PhysicalConstants<f64>,
    grid: &GpeGrid,
) -> Result<GpeGroundState> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("atom count must be positive, got {n}")));
    }
    if !(species.scattering_length >= 0.0) {
        return Err(Error::Domain("scattering length must be nonnegative".into()));
    }
    if grid.points < 16 {
        return Err(Error::Domain("GPE grid needs at least 16 points".into()));
    }
    let omega = trap.omega_bar();
    let osc_length = (constants.hbar / (species.mass * omega)).sqrt();
    let osc_energy = constants.hbar * omega;
    let beta = 4.0 * std::f64::consts::PI * n * species.scattering_length / osc_length;
    let mu_tf = mu_tf_osc(beta);
    let r_tf = (2.0 * mu_tf).sqrt();
    let r_max = grid.r_max.unwrap_or((1.6 * r_tf).max(8.0));
    if r_max <= r_tf {
        return Err(Error::Domain(format!(
            "grid radius {r_max} does not extend beyond the Thomas-Fermi radius {r_tf}"
        )));
    }
    let j = grid.points;
    let h = r_max / (j + 1) as f64;
    let rad = Radial {
        h,
        r: (1..=j).map(|i| i as f64 * h).collect(),
        beta,
    };

    // Start from the larger of the Thomas–Fermi and Gaussian profiles.
    let mut u: Vec<f64> = rad
        .r
        .iter()
        .map(|&r| {
            let tf = ((mu_tf - 0.5 * r * r).max(0.0) / beta.max(1e-300)).sqrt();
            let gauss = (-0.5 * r * r).exp();
            r * tf.max(gauss)
        })
        .collect();
    let s = rad.norm(&u).sqrt();
    u.iter_mut().for_each(|x| *x /= s);

    let peak_nonlinear = 2.0 * beta * u.iter().zip(&rad.r).map(|(x, r)| (x / r).powi(2)).fold(0.0, f64::max);
    let lambda_max = 2.0 / (h * h) + 0.5 * r_max * r_max + peak_nonlinear.max(2.0 * mu_tf);
    let dtau = 0.9 / lambda_max;
    let block = (1.0 / dtau).ceil() as usize;

    let mut hu = vec![0.0; j];
    let (mut energy, mut mu) = rad.energy_and_mu(&u);
    let mut mu_block_start = mu;
    let mut monotone = true;
    let mut iterations = 0;
    loop {
        rad.apply(&u, &mut hu);
        for (x, y) in u.iter_mut().zip(&hu) {
            *x -= dtau * y;
        }
        let s = rad.norm(&u).sqrt();
        u.iter_mut().for_each(|x| *x /= s);
        iterations += 1;
        let (e, m) = rad.energy_and_mu(&u);
        if e > energy * (1.0 + 1e-13) + 1e-300 {
            monotone = false;
        }
        debug_assert!(e <= energy * (1.0 + 1e-10), "imaginary-time energy increased: {energy} -> {e}");
        energy = e;
        mu = m;
        if iterations % block == 0 {
            if ((mu - mu_block_start) / mu).abs() < grid.tolerance {
                break;
            }
            mu_block_start = mu;
        }
        if iterations >= grid.max_iterations {
            return Err(Error::GpeNotConverged {
                iterations,
                residual: residual(&rad, &u, mu),
            });
        }
    }

    let res = residual(&rad, &u, mu);
    let xi_scale = osc_length.powf(-1.5);
    Ok(GpeGroundState {
        r: rad.r.iter().map(|r| r * osc_length).collect(),
        xi: u.iter().zip(&rad.r).map(|(x, r)| x / r * xi_scale).collect(),
        mu_gpe: mu * osc_energy,
        atom_count: n,
        iterations,
        residual: res,
        energy_monotone: monotone,
        osc_length,
        osc_energy,
        grid_step: h,
        u,
    })
}

fn residual(rad: &Radial, u: &[f64], mu: f64) -> f64 {
    let mut hu = vec![0.0; u.len()];
    rad.apply(u, &mut hu);
    let s: f64 = hu.iter().zip(u).map(|(a, b)| (a - mu * b).powi(2)).sum();
    (4.0 * std::f64::consts::PI * s * rad.h).sqrt()
}

impl GpeGroundState {
    /// 4π∫r²|ξ|²dr, which should be 1.
    pub fn normalization(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.u.iter().map(|x| x * x).sum::<f64>() * self.grid_step
    }

    /// ⟨k²⟩ = ∫|∇ξ|²d³r, in m⁻², from finite differences.
    pub fn mean_k2_kinetic(&self) -> f64 {
        let n = self.u.len();
        let mut s = 0.0;
        for j in 0..=n {
            let a = if j == 0 { 0.0 } else { self.u[j - 1] };
            let b = if j == n { 0.0 } else { self.u[j] };
            s += (b - a) * (b - a);
        }
        4.0 * std::f64::consts::PI * s / self.grid_step / (self.osc_length * self.osc_length)
    }

    /// Radial transform ξ̃(k) = (2π)^{-3/2}·4π∫r²ξ(r)·sin(kr)/(kr) dr on
    /// `count` wavenumbers up to the grid Nyquist limit, in oscillator units.
    fn momentum_density(&self, count: usize) -> (Vec<f64>, Vec<f64>) {
        let h = self.grid_step;
        let k_max = std::f64::consts::PI / h;
        let dk = k_max / count as f64;
        let ks: Vec<f64> = (1..=count).map(|i| i as f64 * dk).collect();
        let norm = 4.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI).powf(-1.5);
        let r: Vec<f64> = (1..=self.u.len()).map(|i| i as f64 * h).collect();
        let amp = ks
            .iter()
            .map(|&k| {
                // r²ξ·sin(kr)/(kr) = u·sin(kr)/k
                norm * self.u.iter().zip(&r).map(|(u, r)| u * (k * r).sin()).sum::<f64>() * h / k
            })
            .collect();
        (ks, amp)
    }

    /// ⟨k²⟩ in m⁻² from the Fourier transform of ξ.
    pub fn mean_k2_fourier(&self) -> f64 {
        let count = 4 * self.u.len();
        let (ks, amp) = self.momentum_density(count);
        let dk = ks[0];
        let four_pi = 4.0 * std::f64::consts::PI;
        let k2: f64 = ks.iter().zip(&amp).map(|(k, a)| k.powi(4) * a * a).sum::<f64>() * dk * four_pi;
        k2 / (self.osc_length * self.osc_length)
    }

    /// Per-axis RMS width of |ξ̃(k)|², m⁻¹.
    pub fn momentum_width(&self) -> f64 {
        (self.mean_k2_fourier() / 3.0).sqrt()
    }

    /// Writes `r_m,xi` rows.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "r_m,xi_m-3/2")?;
        for (r, x) in self.r.iter().zip(&self.xi) {
            writeln!(w, "{r:.17e},{x:.17e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem_potential::ChemPotentialModel;

    fn rb() -> (Species<f64>, Trap<f64>, PhysicalConstants<f64>) {
        (Species::rb87(), Trap::from_hz(100.0, 100.0, 100.0), PhysicalConstants::si())
    }

    #[test]
    fn harmonic_limit() {
        let (mut sp, trap, k) = rb();
        sp.scattering_length = 0.0;
        let g = gpe_ground_state(1.0, &sp, &trap, &k, &GpeGrid { points: 400, ..GpeGrid::default() }).unwrap();
        let mu_osc = g.mu_gpe / g.osc_energy;
        assert!((mu_osc - 1.5).abs() < 1e-3, "{mu_osc}");
        assert!((g.normalization() - 1.0).abs() < 1e-8);
        assert!(g.energy_monotone);
        assert!(g.xi.iter().all(|&x| x >= 0.0));
        // Gaussian ground state: per-axis momentum width 1/(√2·ā)
        let w = g.momentum_width() * g.osc_length;
        assert!((w - 0.5f64.sqrt()).abs() < 1e-3, "{w}");
    }

    #[test]
    fn thomas_fermi_limit_and_ordering() {
        let (sp, trap, k) = rb();
        let chem = ChemPotentialModel::new(sp.clone(), trap, k);
        let mut prev_ratio = f64::INFINITY;
        for n in [1e4, 1e5, 1e6] {
            let g = gpe_ground_state(n, &sp, &trap, &k, &GpeGrid::default()).unwrap();
            let tf = chem.mu_thomas_fermi(n);
            let ratio = g.mu_gpe / tf;
            assert!(ratio >= 1.0, "n = {n}: {ratio}");
            assert!(ratio < prev_ratio);
            prev_ratio = ratio;
            assert!(g.energy_monotone);
            assert!((g.normalization() - 1.0).abs() < 1e-8);
        }
        assert!(prev_ratio - 1.0 < 0.05);
    }

    #[test]
    fn fourier_and_kinetic_widths_agree() {
        let (sp, trap, k) = rb();
        let g = gpe_ground_state(1e4, &sp, &trap, &k, &GpeGrid::default()).unwrap();
        let a = g.mean_k2_fourier();
        let b = g.mean_k2_kinetic();
        assert!(((a - b) / b).abs() < 1e-2, "{a} vs {b}");
    }

    #[test]
    fn not_converged_reports_residual() {
        let (sp, trap, k) = rb();
        let grid = GpeGrid {
            max_iterations: 10,
            ..GpeGrid::default()
        };
        match gpe_ground_state(1e5, &sp, &trap, &k, &grid) {
            Err(Error::GpeNotConverged { iterations, residual }) => {
                assert_eq!(iterations, 10);
                assert!(residual > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_dump() {
        let (sp, trap, k) = rb();
        let g = gpe_ground_state(1e3, &sp, &trap, &k, &GpeGrid { points: 100, ..GpeGrid::default() }).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 101);
        assert!(text.starts_with("r_m,"));
    }
}
