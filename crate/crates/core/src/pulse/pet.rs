//! Phenomenological receptor-occupancy model of the four-scan PET test.
//!
//! Occupancy is linear in dose. In pharmacological scans the subject is conscious of the
//! injection, the pain pulse drifts by `delta_mean_r`, and the agonist occupancy is boosted by
//! `1 + beta * delta_mean_r`. The coupling `beta` is a free parameter of the model, not a
//! measured quantity.

use super::{dissolve, drift_in_place, ResolutionKernel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    Agonist,
    Antagonist,
}

/// One scan: injected doses, which species carries the label, and whether the dose is felt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PetConfig {
    pub agonist_dose: f64,
    pub antagonist_dose: f64,
    pub labeled: Species,
    pub pharmacological: bool,
    /// Drift rate per step; ignored when the dose is subpharmacological.
    pub drift_rate: f64,
}

/// Pain pulse the drift acts on during a pharmacological scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSetup {
    pub bins: usize,
    pub width: f64,
    pub center: f64,
    pub steps: usize,
}

impl Default for PulseSetup {
    fn default() -> Self {
        PulseSetup { bins: 50, width: 0.05, center: 0.3, steps: 100 }
    }
}

/// Scans (a)-(d) plus model constants.
#[derive(Clone, Debug, PartialEq)]
pub struct PetExperiment {
    /// (a) agonist labeled, pharmacological; (b) antagonist labeled, pharmacological;
    /// (c) agonist labeled, subpharmacological; (d) antagonist labeled, subpharmacological.
    pub scans: [PetConfig; 4],
    pub beta: f64,
    pub capacity: f64,
    pub occupancy_per_dose: f64,
    pub pulse: PulseSetup,
}

impl PetExperiment {
    /// Same agonist:antagonist ratio in every scan; pharmacological doses are `pharm_scale`
    /// times the subpharmacological ones.
    pub fn standard(agonist_dose: f64, antagonist_dose: f64, pharm_scale: f64, drift_rate: f64, beta: f64) -> Self {
        let scan = |labeled, pharmacological: bool| {
            let f = if pharmacological { pharm_scale } else { 1.0 };
            PetConfig {
                agonist_dose: agonist_dose * f,
                antagonist_dose: antagonist_dose * f,
                labeled,
                pharmacological,
                drift_rate,
            }
        };
        PetExperiment {
            scans: [
                scan(Species::Agonist, true),
                scan(Species::Antagonist, true),
                scan(Species::Agonist, false),
                scan(Species::Antagonist, false),
            ],
            beta,
            capacity: 1.0,
            occupancy_per_dose: 1e-3,
            pulse: PulseSetup::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PetRatios {
    /// Emission ratio between scans (a) and (b).
    pub r_ab: f64,
    /// Emission ratio between scans (c) and (d).
    pub r_cd: f64,
    /// Mean-r displacement of the pulse in scan (a).
    pub drift_displacement: f64,
}

fn drift_displacement(pulse: &PulseSetup, eta: f64) -> Result<f64> {
    let kernel = ResolutionKernel::gaussian(pulse.width)?;
    let mut p = dissolve(1.0, &kernel, pulse.center, pulse.bins)?;
    let before = p.mean_r();
    for _ in 0..pulse.steps {
        drift_in_place(&mut p, eta)?;
    }
    Ok(p.mean_r() - before)
}

/// Emission of the labeled species in one scan.
fn emission(exp: &PetExperiment, scan: &PetConfig, index: usize) -> Result<(f64, f64)> {
    if !(scan.agonist_dose >= 0.0 && scan.antagonist_dose > 0.0) {
        return Err(Error::ModelDomain(format!("scan {index}: doses must be positive")));
    }
    let shift = if scan.pharmacological { drift_displacement(&exp.pulse, scan.drift_rate)? } else { 0.0 };
    let agonist = exp.occupancy_per_dose * scan.agonist_dose * (1.0 + exp.beta * shift);
    let antagonist = exp.occupancy_per_dose * scan.antagonist_dose;
    if agonist + antagonist > exp.capacity {
        return Err(Error::ModelDomain(format!(
            "scan {index}: occupancy {} exceeds receptor capacity {}",
            agonist + antagonist,
            exp.capacity
        )));
    }
    let value = match scan.labeled {
        Species::Agonist => agonist,
        Species::Antagonist => antagonist,
    };
    Ok((value, shift))
}

/// Emission ratios `r_ab` and `r_cd` for the four scans.
pub fn pet_model(exp: &PetExperiment) -> Result<PetRatios> {
    let expected = [
        (Species::Agonist, true),
        (Species::Antagonist, true),
        (Species::Agonist, false),
        (Species::Antagonist, false),
    ];
    for (i, (scan, (labeled, pharm))) in exp.scans.iter().zip(expected).enumerate() {
        if scan.labeled != labeled || scan.pharmacological != pharm {
            return Err(Error::ModelDomain(format!("scan {i} does not match the (a)-(d) layout")));
        }
    }
    if !(exp.beta >= 0.0) {
        return Err(Error::ModelDomain(format!("beta must be nonnegative, got {}", exp.beta)));
    }
    let (a, shift) = emission(exp, &exp.scans[0], 0)?;
    let (b, _) = emission(exp, &exp.scans[1], 1)?;
    let (c, _) = emission(exp, &exp.scans[2], 2)?;
    let (d, _) = emission(exp, &exp.scans[3], 3)?;
    Ok(PetRatios { r_ab: a / b, r_cd: c / d, drift_displacement: shift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drift_gives_equal_ratios() {
        let r = pet_model(&PetExperiment::standard(2.0, 1.0, 100.0, 0.0, 1.0)).unwrap();
        assert_eq!(r.r_ab, r.r_cd);
        assert_eq!(r.drift_displacement, 0.0);
    }

    #[test]
    fn drift_raises_pharmacological_ratio() {
        let r = pet_model(&PetExperiment::standard(2.0, 1.0, 100.0, 0.05, 1.0)).unwrap();
        assert!(r.drift_displacement > 0.0);
        assert!(r.r_ab > r.r_cd);
        assert!((r.r_cd - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_agonist_dose() {
        let r = pet_model(&PetExperiment::standard(1e-12, 1.0, 100.0, 0.05, 1.0)).unwrap();
        assert!(r.r_ab < 1e-9 && r.r_cd < 1e-9);
    }

    #[test]
    fn saturation_is_rejected() {
        let e = PetExperiment::standard(600.0, 500.0, 1.0, 0.0, 1.0);
        assert!(matches!(pet_model(&e), Err(Error::ModelDomain(_))));
    }

    #[test]
    fn scan_layout_is_checked() {
        let mut e = PetExperiment::standard(2.0, 1.0, 100.0, 0.0, 1.0);
        e.scans.swap(0, 1);
        assert!(pet_model(&e).is_err());
    }
}
