//! Compton-scattering attenuation physics for photons in water.
//!
//! Transport is absorb-or-advance: a photon either scatters out of the
//! beam within a depth step (treated as absorption) or passes through
//! unchanged, so the per-step interaction probability follows directly
//! from the Klein-Nishina total cross section.  Energies are in MeV,
//! lengths in cm, cross sections in cm^2.

use crate::error::{Error, Result};

/// CODATA 2018 Avogadro constant, 1/mol.
const AVOGADRO: f64 = 6.02214076e23;
/// Molar mass of water, g/mol.
const WATER_MOLAR_MASS: f64 = 18.015;
/// Electrons per water molecule.
const WATER_ELECTRONS_PER_MOLECULE: f64 = 10.0;
/// Density of liquid water, g/cm^3.
const WATER_DENSITY: f64 = 1.0;

/// Order of the fixed Gauss-Legendre rule used for angular integration.
const QUADRATURE_NODES: usize = 256;

/// Physical constants for the target medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    /// Classical electron radius, cm.
    pub classical_electron_radius_cm: f64,
    /// Electron rest energy, MeV.
    pub electron_rest_energy_mev: f64,
    /// Electron number density of the medium, 1/cm^3.
    pub electron_density_per_cm3: f64,
}

impl PhysicsConstants {
    /// Liquid water at unit density (CODATA 2018 values).
    pub fn water() -> Self {
        PhysicsConstants {
            classical_electron_radius_cm: 2.8179403262e-13,
            electron_rest_energy_mev: 0.51099895,
            electron_density_per_cm3: AVOGADRO * WATER_ELECTRONS_PER_MOLECULE
                * WATER_DENSITY
                / WATER_MOLAR_MASS,
        }
    }

    /// Scattered photon energy after a Compton event at angle `theta`.
    ///
    /// `energy_mev > 0`, `theta` in [0, pi].
    pub fn scattered_energy(&self, energy_mev: f64, theta: f64) -> f64 {
        assert!(energy_mev > 0.0, "photon energy must be positive");
        assert!((0.0..=std::f64::consts::PI).contains(&theta));
        let k = energy_mev / self.electron_rest_energy_mev;
        energy_mev / (1.0 + k * (1.0 - theta.cos()))
    }

    /// Klein-Nishina differential cross section d(sigma)/d(Omega), cm^2/sr.
    pub fn compton_differential(&self, energy_mev: f64, theta: f64) -> f64 {
        let ratio = self.scattered_energy(energy_mev, theta) / energy_mev;
        let sin_sq = theta.sin().powi(2);
        0.5 * self.classical_electron_radius_cm.powi(2)
            * ratio.powi(2)
            * (ratio + 1.0 / ratio - sin_sq)
    }

    /// Total Compton cross section per electron, cm^2, by 256-node
    /// Gauss-Legendre integration of the differential over solid angle.
    pub fn compton_total(&self, energy_mev: f64) -> Result<f64> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let sigma: f64 = gauss_legendre(QUADRATURE_NODES)
            .into_iter()
            .map(|(x, w)| {
                // map [-1, 1] onto theta in [0, pi]
                let theta = half_pi * (x + 1.0);
                w * half_pi * self.compton_differential(energy_mev, theta)
                    * theta.sin()
                    * 2.0
                    * std::f64::consts::PI
            })
            .sum();
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Numeric {
                context: "compton_total",
                value: sigma,
            });
        }
        Ok(sigma)
    }

    /// Linear attenuation coefficient mu = n_e * sigma(E), 1/cm.
    pub fn linear_attenuation(&self, energy_mev: f64) -> Result<f64> {
        Ok(self.electron_density_per_cm3 * self.compton_total(energy_mev)?)
    }
}

/// Probability that a photon interacts within one step of width `step_cm`
/// under attenuation coefficient `mu`: 1 - exp(-mu * dx).
pub fn step_probability(mu: f64, step_cm: f64) -> Result<f64> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            reason: format!("attenuation coefficient must be finite and >= 0, got {mu}"),
        });
    }
    if !step_cm.is_finite() || step_cm <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "step_cm",
            reason: format!("step width must be finite and > 0, got {step_cm}"),
        });
    }
    Ok(-f64::exp_m1(-mu * step_cm))
}

/// Beam and discretization parameters for one transport run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBeam {
    energy_mev: f64,
    step_cm: f64,
    num_steps: usize,
}

impl PhotonBeam {
    pub fn new(energy_mev: f64, step_cm: f64, num_steps: usize) -> Result<Self> {
        if !energy_mev.is_finite() || energy_mev <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "energy_mev",
                reason: format!("beam energy must be finite and > 0, got {energy_mev}"),
            });
        }
        if !step_cm.is_finite() || step_cm <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "step_cm",
                reason: format!("step width must be finite and > 0, got {step_cm}"),
            });
        }
        if num_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "num_steps",
                reason: "at least one depth step is required".into(),
            });
        }
        Ok(PhotonBeam {
            energy_mev,
            step_cm,
            num_steps,
        })
    }

    pub fn energy_mev(&self) -> f64 {
        self.energy_mev
    }

    pub fn step_cm(&self) -> f64 {
        self.step_cm
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }
}

/// Per-step interaction probabilities p_0 .. p_{N-1}.
///
/// Physics-derived schedules always satisfy p_k in [0, 1); explicit
/// schedules may use p_k = 1 to model a fully absorbing step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    probs: Vec<f64>,
}

impl StepSchedule {
    /// Wraps explicit probabilities, each required to lie in [0, 1].
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "probabilities",
                reason: "schedule must cover at least one step".into(),
            });
        }
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidProbability { value: p });
            }
        }
        Ok(StepSchedule { probs })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_steps(&self) -> usize {
        self.probs.len()
    }

    /// Probability of surviving every step: prod(1 - p_k).
    pub fn survival_probability(&self) -> f64 {
        self.probs.iter().map(|p| 1.0 - p).product()
    }
}

/// Derives the uniform interaction schedule for `beam` in the medium
/// described by `constants`.
pub fn build_schedule(constants: &PhysicsConstants, beam: &PhotonBeam) -> Result<StepSchedule> {
    let mu = constants.linear_attenuation(beam.energy_mev)?;
    let p = step_probability(mu, beam.step_cm)?;
    StepSchedule::from_probabilities(vec![p; beam.num_steps])
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// found by Newton iteration on the Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root (descending order)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x) by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    /// Closed-form Klein-Nishina total cross section (per electron).
    fn kn_total_closed_form(constants: &PhysicsConstants, energy_mev: f64) -> f64 {
        let k = energy_mev / constants.electron_rest_energy_mev;
        let re2 = constants.classical_electron_radius_cm.powi(2);
        let l = (1.0 + 2.0 * k).ln();
        2.0 * PI
            * re2
            * ((1.0 + k) / (k * k) * (2.0 * (1.0 + k) / (1.0 + 2.0 * k) - l / k)
                + l / (2.0 * k)
                - (1.0 + 3.0 * k) / (1.0 + 2.0 * k).powi(2))
    }

    #[test]
    fn water_electron_density() {
        let c = PhysicsConstants::water();
        assert_relative_eq!(
            c.electron_density_per_cm3,
            3.342848048848182e23,
            max_relative = 1e-15
        );
    }

    #[test]
    fn backscatter_energy_at_ten_mev() {
        let c = PhysicsConstants::water();
        assert_relative_eq!(
            c.scattered_energy(10.0, PI),
            0.2491341115299506,
            max_relative = 1e-12
        );
    }

    #[test]
    fn right_angle_scatter_energy() {
        let c = PhysicsConstants::water();
        // E' = E / (1 + E/m_e c^2) at 90 degrees
        let expected = 10.0 / (1.0 + 10.0 / c.electron_rest_energy_mev);
        assert_relative_eq!(
            c.scattered_energy(10.0, PI / 2.0),
            expected,
            max_relative = 1e-15
        );
        assert_abs_diff_eq!(expected, 0.4862, epsilon = 5e-5);
    }

    #[test]
    fn forward_scatter_keeps_energy_and_classical_cross_section() {
        let c = PhysicsConstants::water();
        for e in [0.1, 1.0, 10.0] {
            assert_relative_eq!(c.scattered_energy(e, 0.0), e, max_relative = 1e-15);
            assert_relative_eq!(
                c.compton_differential(e, 0.0),
                c.classical_electron_radius_cm.powi(2),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn scattered_energy_decreases_with_angle() {
        let c = PhysicsConstants::water();
        let mut prev = f64::INFINITY;
        for i in 0..=64 {
            let theta = PI * i as f64 / 64.0;
            let e = c.scattered_energy(10.0, theta);
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn quadrature_matches_closed_form_across_energies() {
        let c = PhysicsConstants::water();
        for e in [0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0] {
            assert_relative_eq!(
                c.compton_total(e).unwrap(),
                kn_total_closed_form(&c, e),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn ten_mev_cross_section_and_attenuation() {
        let c = PhysicsConstants::water();
        assert_relative_eq!(
            c.compton_total(10.0).unwrap(),
            5.098841697741e-26,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            c.linear_attenuation(10.0).unwrap(),
            0.017044653020678233,
            max_relative = 1e-12
        );
    }

    #[test]
    fn low_energy_limit_approaches_thomson() {
        let c = PhysicsConstants::water();
        let thomson = 8.0 * PI / 3.0 * c.classical_electron_radius_cm.powi(2);
        let sigma = c.compton_total(1e-4).unwrap();
        assert_relative_eq!(sigma, thomson, max_relative = 1e-3);
        assert!(sigma < thomson, "Klein-Nishina must undershoot Thomson");
    }

    #[test]
    fn cross_section_decreases_with_energy() {
        let c = PhysicsConstants::water();
        let mut prev = f64::INFINITY;
        for e in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let sigma = c.compton_total(e).unwrap();
            assert!(sigma < prev);
            prev = sigma;
        }
    }

    #[test]
    fn step_probability_values() {
        // derived attenuation at 10 MeV over 1 cm
        let mu = 0.017044653020678233;
        assert_relative_eq!(
            step_probability(mu, 1.0).unwrap(),
            0.01690021472024339,
            max_relative = 1e-12
        );
        // display-rounded mu reproduces the 4-significant-digit value
        assert_abs_diff_eq!(
            step_probability(0.01704, 1.0).unwrap(),
            0.016896,
            epsilon = 5e-7
        );
        assert_eq!(step_probability(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            step_probability(1e3, 1.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn step_probability_rejects_bad_domain() {
        assert!(step_probability(-0.1, 1.0).is_err());
        assert!(step_probability(f64::NAN, 1.0).is_err());
        assert!(step_probability(0.5, 0.0).is_err());
        assert!(step_probability(0.5, -1.0).is_err());
    }

    #[test]
    fn schedule_is_uniform_and_consistent() {
        let c = PhysicsConstants::water();
        let beam = PhotonBeam::new(10.0, 1.0, 15).unwrap();
        let schedule = build_schedule(&c, &beam).unwrap();
        assert_eq!(schedule.num_steps(), 15);
        let p = schedule.probabilities()[0];
        assert!(schedule.probabilities().iter().all(|&q| q == p));
        assert_relative_eq!(p, 0.01690021472024339, max_relative = 1e-12);
        assert_relative_eq!(
            schedule.survival_probability(),
            0.7743976363099181,
            max_relative = 1e-10
        );
    }

    #[test]
    fn thirty_one_step_survival() {
        let c = PhysicsConstants::water();
        let beam = PhotonBeam::new(10.0, 1.0, 31).unwrap();
        let schedule = build_schedule(&c, &beam).unwrap();
        assert_relative_eq!(
            schedule.survival_probability(),
            0.5895567806412723,
            max_relative = 1e-10
        );
    }

    #[test]
    fn schedule_validation() {
        assert!(StepSchedule::from_probabilities(vec![]).is_err());
        assert!(StepSchedule::from_probabilities(vec![0.5, 1.1]).is_err());
        assert!(StepSchedule::from_probabilities(vec![-0.1]).is_err());
        assert!(StepSchedule::from_probabilities(vec![f64::NAN]).is_err());
        // degenerate fully absorbing step is representable
        let s = StepSchedule::from_probabilities(vec![1.0, 0.0]).unwrap();
        assert_eq!(s.survival_probability(), 0.0);
    }

    #[test]
    fn beam_validation() {
        assert!(PhotonBeam::new(0.0, 1.0, 5).is_err());
        assert!(PhotonBeam::new(-1.0, 1.0, 5).is_err());
        assert!(PhotonBeam::new(10.0, 0.0, 5).is_err());
        assert!(PhotonBeam::new(10.0, 1.0, 0).is_err());
        assert!(PhotonBeam::new(10.0, 1.0, 15).is_ok());
    }

    #[test]
    fn quadrature_rule_integrates_polynomials_exactly() {
        // degree-7 polynomial over [-1, 1]
        let exact = 2.0 / 5.0 + 2.0 / 3.0; // integral of x^4 + x^2 (+ odd terms)
        let got: f64 = gauss_legendre(8)
            .into_iter()
            .map(|(x, w)| w * (x.powi(4) + x.powi(2) + x.powi(7) + x.powi(3)))
            .sum();
        assert_relative_eq!(got, exact, max_relative = 1e-14);
        // weights of any rule sum to the interval length
        let wsum: f64 = gauss_legendre(QUADRATURE_NODES).iter().map(|(_, w)| w).sum();
        assert_relative_eq!(wsum, 2.0, max_relative = 1e-13);
    }
}
