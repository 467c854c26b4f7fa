//! Belief masses and subjective opinions over the three-state frame
//! `{free, statically occupied, dynamically occupied}`.
//!
//! Masses live on the reduced power set: the three singletons, the composite
//! "occupied either way" set and the whole frame (unknown). Every pairwise
//! intersection of these sets is again one of them or empty, so Dempster
//! combination is closed over [`BeliefMass`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ m(A) = 1` accepted by [`BeliefMass`] constructors.
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// Conflict level at which two masses are considered irreconcilable.
pub const TOTAL_CONFLICT: f64 = 1.0 - 1e-12;

/// Largest drift of a combined mass sum from 1 that is left uncorrected.
pub const RENORMALIZE_SLACK: f64 = 1e-12;

/// Number of singleton states, `K = |Θ|`.
pub const CLASS_COUNT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("evidence for {state} must be finite and non-negative, got {value}")]
    NegativeEvidence { state: CellState, value: f64 },
    #[error("mass for {hypothesis} must lie in [0, 1], got {value}")]
    MassOutOfRange { hypothesis: Hypothesis, value: f64 },
    #[error("masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("opinion beliefs and uncertainty sum to {sum}, expected 1")]
    OpinionSum { sum: f64 },
    #[error("total conflict between combined masses (kappa = {kappa})")]
    TotalConflict { kappa: f64 },
}

/// A singleton of the frame of discernment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellState {
    Free,
    StaticOccupied,
    DynamicOccupied,
}

impl CellState {
    pub const ALL: [CellState; 3] = [CellState::Free, CellState::StaticOccupied, CellState::DynamicOccupied];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn hypothesis(self) -> Hypothesis {
        match self {
            CellState::Free => Hypothesis::Free,
            CellState::StaticOccupied => Hypothesis::Static,
            CellState::DynamicOccupied => Hypothesis::Dynamic,
        }
    }
}

impl fmt::Display for CellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellState::Free => "F",
            CellState::StaticOccupied => "O_s",
            CellState::DynamicOccupied => "O_d",
        })
    }
}

/// A member of the reduced power set.
///
/// The discriminant is the set's bitmask over `F = 1`, `O_s = 2`, `O_d = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Free = 0b001,
    Static = 0b010,
    Dynamic = 0b100,
    /// `{O_s, O_d}`
    Occupied = 0b110,
    /// `Θ`
    Unknown = 0b111,
}

impl Hypothesis {
    /// Storage order used throughout the crate.
    pub const ALL: [Hypothesis; 5] = [
        Hypothesis::Free,
        Hypothesis::Static,
        Hypothesis::Dynamic,
        Hypothesis::Occupied,
        Hypothesis::Unknown,
    ];

    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn from_bits(bits: u8) -> Option<Hypothesis> {
        Hypothesis::ALL.into_iter().find(|h| h.bits() == bits)
    }

    /// Position of this hypothesis in [`Hypothesis::ALL`] and in mass vectors.
    pub fn index(self) -> usize {
        match self {
            Hypothesis::Free => 0,
            Hypothesis::Static => 1,
            Hypothesis::Dynamic => 2,
            Hypothesis::Occupied => 3,
            Hypothesis::Unknown => 4,
        }
    }

    /// Set intersection; `None` is the empty set.
    pub fn intersect(self, other: Hypothesis) -> Option<Hypothesis> {
        match self.bits() & other.bits() {
            0 => None,
            bits => Some(Hypothesis::from_bits(bits).expect("reduced power set is closed")),
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::Free => "F",
            Hypothesis::Static => "O_s",
            Hypothesis::Dynamic => "O_d",
            Hypothesis::Occupied => "O_sd",
            Hypothesis::Unknown => "Theta",
        })
    }
}

/// A mass assignment over the reduced power set, stored in
/// [`Hypothesis::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefMass([f64; 5]);

impl Default for BeliefMass {
    fn default() -> Self {
        BeliefMass::VACUOUS
    }
}

impl BeliefMass {
    /// All mass on `Θ`: nothing is known about the cell.
    pub const VACUOUS: BeliefMass = BeliefMass([0.0, 0.0, 0.0, 0.0, 1.0]);

    /// Builds a mass from the four specific hypotheses; `Θ` absorbs the rest.
    pub fn new(free: f64, stat: f64, dynamic: f64, occupied: f64) -> Result<Self, EvidenceError> {
        let specific = [free, stat, dynamic, occupied];
        for (h, &v) in Hypothesis::ALL.iter().zip(&specific) {
            check_unit(*h, v)?;
        }
        let sum = free + stat + dynamic + occupied;
        if sum > 1.0 + MASS_SUM_TOLERANCE {
            return Err(EvidenceError::MassSum { sum });
        }
        Ok(BeliefMass([free, stat, dynamic, occupied, (1.0 - sum).max(0.0)]))
    }

    /// Builds a mass from all five components, which must already sum to 1.
    pub fn from_array(masses: [f64; 5]) -> Result<Self, EvidenceError> {
        for (h, &v) in Hypothesis::ALL.iter().zip(&masses) {
            check_unit(*h, v)?;
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(EvidenceError::MassSum { sum });
        }
        Ok(BeliefMass(masses))
    }

    /// A crisp mass: all belief on one hypothesis.
    pub fn certain(h: Hypothesis) -> Self {
        let mut m = [0.0; 5];
        m[h.index()] = 1.0;
        BeliefMass(m)
    }

    /// `m(h) = value`, the remainder on `Θ`.
    pub fn simple(h: Hypothesis, value: f64) -> Result<Self, EvidenceError> {
        check_unit(h, value)?;
        let mut m = [0.0; 5];
        m[h.index()] += value;
        m[Hypothesis::Unknown.index()] += 1.0 - value;
        Ok(BeliefMass(m))
    }

    pub fn get(&self, h: Hypothesis) -> f64 {
        self.0[h.index()]
    }

    pub fn as_array(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn free(&self) -> f64 {
        self.0[0]
    }

    pub fn static_occupied(&self) -> f64 {
        self.0[1]
    }

    pub fn dynamic_occupied(&self) -> f64 {
        self.0[2]
    }

    pub fn occupied_either(&self) -> f64 {
        self.0[3]
    }

    pub fn unknown(&self) -> f64 {
        self.0[4]
    }

    /// Total mass committed to any occupied hypothesis.
    pub fn occupied_total(&self) -> f64 {
        self.0[1] + self.0[2] + self.0[3]
    }

    pub fn is_vacuous(&self) -> bool {
        self.0[4] == 1.0
    }
}

fn check_unit(h: Hypothesis, value: f64) -> Result<(), EvidenceError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EvidenceError::MassOutOfRange { hypothesis: h, value })
    }
}

/// Non-negative Dirichlet evidence per singleton state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletEvidence([f64; CLASS_COUNT]);

impl DirichletEvidence {
    pub fn new(free: f64, stat: f64, dynamic: f64) -> Result<Self, EvidenceError> {
        let e = [free, stat, dynamic];
        for (state, &value) in CellState::ALL.iter().zip(&e) {
            if !(value.is_finite() && value >= 0.0) {
                return Err(EvidenceError::NegativeEvidence { state: *state, value });
            }
        }
        Ok(DirichletEvidence(e))
    }

    pub fn get(&self, state: CellState) -> f64 {
        self.0[state.index()]
    }

    /// `α_A = e_A + 1`
    pub fn alpha(&self) -> [f64; CLASS_COUNT] {
        self.0.map(|e| e + 1.0)
    }

    /// Dirichlet strength `S = Σ α_A`.
    pub fn strength(&self) -> f64 {
        self.alpha().iter().sum()
    }
}

/// Belief per singleton plus explicit uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveOpinion {
    belief: [f64; CLASS_COUNT],
    uncertainty: f64,
}

impl SubjectiveOpinion {
    pub fn new(belief: [f64; CLASS_COUNT], uncertainty: f64) -> Result<Self, EvidenceError> {
        for (state, &b) in CellState::ALL.iter().zip(&belief) {
            check_unit(state.hypothesis(), b)?;
        }
        check_unit(Hypothesis::Unknown, uncertainty)?;
        let sum = belief.iter().sum::<f64>() + uncertainty;
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(EvidenceError::OpinionSum { sum });
        }
        Ok(SubjectiveOpinion { belief, uncertainty })
    }

    pub fn belief(&self, state: CellState) -> f64 {
        self.belief[state.index()]
    }

    pub fn beliefs(&self) -> [f64; CLASS_COUNT] {
        self.belief
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }
}

/// Converts Dirichlet evidence into a subjective opinion:
/// `b_A = e_A / S`, `u = K / S` with `S = Σ (e_A + 1)`.
pub fn evidence_to_opinion(evidence: &DirichletEvidence) -> SubjectiveOpinion {
    let strength = evidence.strength();
    SubjectiveOpinion {
        belief: evidence.0.map(|e| e / strength),
        uncertainty: CLASS_COUNT as f64 / strength,
    }
}

/// Reads an opinion as a mass: singletons take the beliefs, `Θ` the
/// uncertainty, and the composite occupied set gets nothing.
pub fn opinion_to_mass(opinion: &SubjectiveOpinion) -> BeliefMass {
    let [f, s, d] = opinion.belief;
    BeliefMass([f, s, d, 0.0, opinion.uncertainty])
}

/// Dempster's rule of combination on the reduced power set.
///
/// Each focal product is accumulated in row-major pair order (first operand
/// outer), so the result does not depend on how the caller enumerates pairs.
/// If rounding has pushed the normalized sum more than [`RENORMALIZE_SLACK`]
/// away from 1, or a component above 1, the result is divided by its sum once more. Without that
/// step the error grows by `1/(1 - κ)` per combination and a cell hit
/// thousands of times leaves the simplex.
pub fn combine_dempster(a: &BeliefMass, b: &BeliefMass) -> Result<BeliefMass, EvidenceError> {
    let [f1, s1, d1, o1, t1] = a.0;
    let [f2, s2, d2, o2, t2] = b.0;

    let free = f1 * f2 + f1 * t2 + t1 * f2;
    let stat = s1 * s2 + s1 * o2 + s1 * t2 + o1 * s2 + t1 * s2;
    let dynamic = d1 * d2 + d1 * o2 + d1 * t2 + o1 * d2 + t1 * d2;
    let occupied = o1 * o2 + o1 * t2 + t1 * o2;
    let unknown = t1 * t2;

    // F against any occupied set, O_s against O_d.
    let kappa = f1 * s2 + f1 * d2 + f1 * o2 + s1 * f2 + s1 * d2 + d1 * f2 + d1 * s2 + o1 * f2;
    if kappa >= TOTAL_CONFLICT {
        return Err(EvidenceError::TotalConflict { kappa });
    }
    let norm = 1.0 - kappa;
    let m = [
        free / norm,
        stat / norm,
        dynamic / norm,
        occupied / norm,
        unknown / norm,
    ];
    let sum: f64 = m.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_SLACK || m.iter().any(|&v| v > 1.0) {
        return Ok(BeliefMass(m.map(|v| v / sum)));
    }
    Ok(BeliefMass(m))
}

/// Outcome of thresholding a cell's mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellLabel {
    Free,
    Static,
    Dynamic,
    /// Occupied, but neither static nor dynamic dominates.
    Occupied,
    Unknown,
}

impl CellLabel {
    pub fn is_occupied(self) -> bool {
        matches!(self, CellLabel::Static | CellLabel::Dynamic | CellLabel::Occupied)
    }
}

impl From<CellState> for CellLabel {
    fn from(s: CellState) -> Self {
        match s {
            CellState::Free => CellLabel::Free,
            CellState::StaticOccupied => CellLabel::Static,
            CellState::DynamicOccupied => CellLabel::Dynamic,
        }
    }
}

/// Labels a cell by strict comparison against `threshold`.
///
/// A singleton wins when its own mass exceeds the threshold; otherwise the
/// summed occupied mass may still yield [`CellLabel::Occupied`].
pub fn classify_cell(m: &BeliefMass, threshold: f64) -> CellLabel {
    if m.free() > threshold {
        CellLabel::Free
    } else if m.static_occupied() > threshold {
        CellLabel::Static
    } else if m.dynamic_occupied() > threshold {
        CellLabel::Dynamic
    } else if m.occupied_total() > threshold {
        CellLabel::Occupied
    } else {
        CellLabel::Unknown
    }
}
