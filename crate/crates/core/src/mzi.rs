//! The nested Mach-Zehnder interferometer: five three-channel slices, the
//! four beam-splitter steps, a variant with the last two splitters removed,
//! and the named history families studied on it.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{Dynamics, StepUnitary};
use crate::error::{Error, Result};
use crate::histories::{refine, Family, History};
use crate::statespace::{Ket, Pdi, Projector, SliceRef, TimeSlice, DEFAULT_TOL};

pub const SLICE_LABELS: [[&str; 3]; 5] = [
    ["S", "R", "Q"],
    ["A", "D", "Q"],
    ["A", "B", "C"],
    ["A", "E", "H"],
    ["F", "G", "H"],
];

/// Outer beam-splitter reflectivity `α²`, with `β² = 1 - α²`. The inner
/// splitters are balanced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    alpha2: f64,
}

impl BeamSplitterParams {
    pub fn new(alpha2: f64) -> Result<Self> {
        if !(alpha2 > 0.0 && alpha2 < 1.0) {
            return Err(Error::InvalidAlpha2(alpha2));
        }
        Ok(Self { alpha2 })
    }

    /// `α² = 1/3`, where `F_C` becomes consistent.
    pub fn special() -> Self {
        Self { alpha2: 1.0 / 3.0 }
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn beta2(&self) -> f64 {
        1.0 - self.alpha2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }

    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha2).sqrt()
    }
}

fn slices() -> Vec<SliceRef> {
    SLICE_LABELS
        .iter()
        .enumerate()
        .map(|(t, labels)| TimeSlice::new(t, *labels).expect("static labels"))
        .collect()
}

fn outer_input(s: &[SliceRef], p: BeamSplitterParams) -> Result<StepUnitary> {
    let (a, b) = (p.alpha(), p.beta());
    StepUnitary::from_images(
        s[0].clone(),
        s[1].clone(),
        &[
            ("S", &[("A", a), ("D", b)]),
            ("R", &[("A", -b), ("D", a)]),
            ("Q", &[("Q", 1.0)]),
        ],
    )
}

fn inner_input(s: &[SliceRef]) -> Result<StepUnitary> {
    let r = FRAC_1_SQRT_2;
    StepUnitary::from_images(
        s[1].clone(),
        s[2].clone(),
        &[
            ("A", &[("A", 1.0)]),
            ("D", &[("B", r), ("C", r)]),
            ("Q", &[("B", r), ("C", -r)]),
        ],
    )
}

/// Builds the four-step dynamics with every splitter in place.
pub fn build_nested_mzi(p: BeamSplitterParams) -> Result<Dynamics> {
    let s = slices();
    let (a, b) = (p.alpha(), p.beta());
    let r = FRAC_1_SQRT_2;
    let inner_output = StepUnitary::from_images(
        s[2].clone(),
        s[3].clone(),
        &[
            ("A", &[("A", 1.0)]),
            ("B", &[("E", -r), ("H", r)]),
            ("C", &[("E", r), ("H", r)]),
        ],
    )?;
    let outer_output = StepUnitary::from_images(
        s[3].clone(),
        s[4].clone(),
        &[
            ("A", &[("F", a), ("G", b)]),
            ("E", &[("F", b), ("G", -a)]),
            ("H", &[("H", 1.0)]),
        ],
    )?;
    Dynamics::new(vec![
        outer_input(&s, p)?,
        inner_input(&s)?,
        inner_output,
        outer_output,
    ])
}

/// Splitters 3 and 4 removed: beams pass straight through, B→H, C→E, A→A
/// and then A→G, E→F, H→H.
pub fn build_no_bs34(p: BeamSplitterParams) -> Result<Dynamics> {
    let s = slices();
    let inner_output = StepUnitary::from_images(
        s[2].clone(),
        s[3].clone(),
        &[
            ("A", &[("A", 1.0)]),
            ("B", &[("H", 1.0)]),
            ("C", &[("E", 1.0)]),
        ],
    )?;
    let outer_output = StepUnitary::from_images(
        s[3].clone(),
        s[4].clone(),
        &[
            ("A", &[("G", 1.0)]),
            ("E", &[("F", 1.0)]),
            ("H", &[("H", 1.0)]),
        ],
    )?;
    Dynamics::new(vec![
        outer_input(&s, p)?,
        inner_input(&s)?,
        inner_output,
        outer_output,
    ])
}

/// The history families analysed on the interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedFamilyId {
    /// `S0 ⊙ {A2, ~A2} ⊙ F4` plus `S0 ⊙ ~F4`.
    Eq8Full,
    /// `S0 ⊙ {F4, G4, H4}`.
    Eq12Detectors,
    FA,
    FAPrime,
    FB,
    FAbc,
    FC,
    /// `S0 ⊙ {[φ2], I - [φ2]} ⊙ F4` with the backward wave `φ2`.
    Eq25Backward,
    /// `S0 ⊙ {A2, B2, C2} ⊙ {F4, G4, H4}` without splitters 3 and 4.
    Eq26NoBs34,
}

impl NamedFamilyId {
    pub const ALL: [NamedFamilyId; 9] = [
        Self::Eq8Full,
        Self::Eq12Detectors,
        Self::FA,
        Self::FAPrime,
        Self::FB,
        Self::FAbc,
        Self::FC,
        Self::Eq25Backward,
        Self::Eq26NoBs34,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Eq8Full => "EQ8_FULL",
            Self::Eq12Detectors => "EQ12_DETECTORS",
            Self::FA => "F_A",
            Self::FAPrime => "F_A_PRIME",
            Self::FB => "F_B",
            Self::FAbc => "F_ABC",
            Self::FC => "F_C",
            Self::Eq25Backward => "EQ25_BACKWARD",
            Self::Eq26NoBs34 => "EQ26_NO_BS34",
        }
    }
}

impl fmt::Display for NamedFamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedFamilyId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.name() == key)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|id| id.name()).collect();
                format!(
                    "unknown family `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

fn proj(d: &Dynamics, t: usize, labels: &[&str]) -> Projector {
    Projector::from_labels(&d.slices()[t], labels).expect("static labels")
}

fn two_time(mid: Vec<Projector>, fin: &Projector) -> Vec<History> {
    mid.into_iter()
        .map(|m| History::new(vec![m, fin.clone()]).expect("ordered"))
        .collect()
}

/// Returns the dynamics and family for `id`. Families conditioned on `F4`
/// are subfamilies; the others are complete.
pub fn named_family(id: NamedFamilyId, p: BeamSplitterParams) -> Result<(Dynamics, Family)> {
    let d = match id {
        NamedFamilyId::Eq26NoBs34 => build_no_bs34(p)?,
        _ => build_nested_mzi(p)?,
    };
    let s0 = Ket::basis(d.slices()[0].clone(), "S")?;
    let f4 = proj(&d, 4, &["F"]);
    let a2 = proj(&d, 2, &["A"]);
    let (histories, complete) = match id {
        NamedFamilyId::Eq8Full => {
            let mut hs = two_time(vec![a2.clone(), a2.complement()], &f4);
            hs.push(History::new(vec![f4.complement()])?);
            (hs, true)
        }
        NamedFamilyId::Eq12Detectors => (
            Pdi::channels(&d.slices()[4])
                .into_parts()
                .into_iter()
                .map(|p| History::new(vec![p]))
                .collect::<Result<Vec<_>>>()?,
            true,
        ),
        NamedFamilyId::FA => (two_time(vec![a2.clone(), a2.complement()], &f4), false),
        NamedFamilyId::FAPrime => {
            let (_, fa) = named_family(NamedFamilyId::FA, p)?;
            let fam = refine(&fa, 1, Pdi::channels(&d.slices()[1]).parts(), DEFAULT_TOL)?;
            let fam = refine(&fam, 3, Pdi::channels(&d.slices()[3]).parts(), DEFAULT_TOL)?;
            return Ok((d, fam));
        }
        NamedFamilyId::FB => {
            let b2 = proj(&d, 2, &["B"]);
            (two_time(vec![b2.clone(), b2.complement()], &f4), false)
        }
        NamedFamilyId::FAbc => (
            two_time(Pdi::channels(&d.slices()[2]).into_parts(), &f4),
            false,
        ),
        NamedFamilyId::FC => {
            let c2 = proj(&d, 2, &["C"]);
            (two_time(vec![c2.clone(), c2.complement()], &f4), false)
        }
        NamedFamilyId::Eq25Backward => {
            let phi2 = d.transport(&Ket::basis(d.slices()[4].clone(), "F")?, 2)?;
            let p = Projector::from_ket(&phi2)?.with_name("[φ2]");
            let q = p.complement().with_name("I2-[φ2]");
            (two_time(vec![p, q], &f4), false)
        }
        NamedFamilyId::Eq26NoBs34 => {
            let mut hs = Vec::new();
            for mid in Pdi::channels(&d.slices()[2]).into_parts() {
                for fin in Pdi::channels(&d.slices()[4]).into_parts() {
                    hs.push(History::new(vec![mid.clone(), fin])?);
                }
            }
            (hs, true)
        }
    };
    let fam = Family::new(&d, s0, histories, complete, DEFAULT_TOL)?;
    Ok((d, fam))
}
