//! The toy bit: four ontic states, three complementary dichotomic
//! measurements and the knowledge balance principle.
//!
//! | measurement | t1 | t2 | t3 | t4 |
//! |-------------|----|----|----|----|
//! | `mz`        | 1  | 1  | 0  | 0  |
//! | `mx`        | 1  | 0  | 1  | 0  |
//! | `my`        | 1  | 0  | 0  | 1  |
//!
//! A measurement leaves the observer knowing exactly its outcome set and
//! resamples the ontic state uniformly within it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToyError {
    #[error("epistemic state must be nonempty")]
    EmptyEpistemic,
    #[error("ontic state {ontic} is not in the epistemic state {epistemic}")]
    OnticOutsideEpistemic { ontic: OnticState, epistemic: Property },
    #[error("measurement sequence must be nonempty")]
    EmptySequence,
    #[error("unknown measurement {0:?}")]
    UnknownMeasurement(String),
    #[error("unknown ontic state {0:?}")]
    UnknownState(String),
    #[error("outcome must be 0 or 1, got {0}")]
    BadOutcome(u8),
    #[error("no ontic state is compatible with the recorded outcomes")]
    InconsistentKnowledge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OnticState {
    T1,
    T2,
    T3,
    T4,
}

impl OnticState {
    pub const ALL: [OnticState; 4] = [Self::T1, Self::T2, Self::T3, Self::T4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for OnticState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.index() + 1)
    }
}

impl FromStr for OnticState {
    type Err = ToyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "t1" => Ok(Self::T1),
            "t2" => Ok(Self::T2),
            "t3" => Ok(Self::T3),
            "t4" => Ok(Self::T4),
            other => Err(ToyError::UnknownState(other.to_string())),
        }
    }
}

impl Serialize for OnticState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A subset of the four ontic states, stored as a 4-bit mask (bit `i` is
/// `t(i+1)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Property(u8);

impl Property {
    pub const EMPTY: Property = Property(0);
    pub const FULL: Property = Property(0b1111);

    pub fn from_mask(mask: u8) -> Self {
        Property(mask & 0b1111)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    /// All 16 subsets, by mask.
    pub fn all() -> impl Iterator<Item = Property> {
        (0..16).map(Property)
    }

    pub fn singleton(t: OnticState) -> Self {
        Property(1 << t.index())
    }

    pub fn contains(self, t: OnticState) -> bool {
        self.0 >> t.index() & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = OnticState> {
        OnticState::ALL.into_iter().filter(move |&t| self.contains(t))
    }

    pub fn complement(self) -> Self {
        Property(!self.0 & 0b1111)
    }

    pub fn meet(self, other: Self) -> Self {
        Property(self.0 & other.0)
    }

    pub fn join(self, other: Self) -> Self {
        Property(self.0 | other.0)
    }

    pub fn implies(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }
}

impl FromIterator<OnticState> for Property {
    fn from_iter<I: IntoIterator<Item = OnticState>>(iter: I) -> Self {
        iter.into_iter().fold(Property::EMPTY, |p, t| p.join(Property::singleton(t)))
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

/// Parses `{t1,t3}`; braces are optional.
impl FromStr for Property {
    type Err = ToyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        inner
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(OnticState::from_str)
            .collect()
    }
}

impl Serialize for Property {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EpistemicState {
    members: Property,
}

impl EpistemicState {
    pub fn new(members: Property) -> Result<Self, ToyError> {
        if members.is_empty() {
            return Err(ToyError::EmptyEpistemic);
        }
        Ok(Self { members })
    }

    pub fn ignorance() -> Self {
        Self { members: Property::FULL }
    }

    pub fn members(&self) -> Property {
        self.members
    }

    /// Knowledge balance allows knowing one bit of two, or none: sizes 2
    /// and 4 only.
    pub fn violates_balance(&self) -> bool {
        !matches!(self.members.len(), 2 | 4)
    }
}

impl fmt::Display for EpistemicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.members.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// States with outcome 1.
    fn plus(self) -> Property {
        use OnticState::*;
        match self {
            Axis::Z => [T1, T2].into_iter().collect(),
            Axis::X => [T1, T3].into_iter().collect(),
            Axis::Y => [T1, T4].into_iter().collect(),
        }
    }

    fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyMeasurement {
    pub axis: Axis,
    pub orthogonal: bool,
}

impl ToyMeasurement {
    pub const MX: Self = Self::new(Axis::X, false);
    pub const MY: Self = Self::new(Axis::Y, false);
    pub const MZ: Self = Self::new(Axis::Z, false);

    pub const ALL: [Self; 6] = [
        Self::MX,
        Self::MY,
        Self::MZ,
        Self::new(Axis::X, true),
        Self::new(Axis::Y, true),
        Self::new(Axis::Z, true),
    ];

    pub const fn new(axis: Axis, orthogonal: bool) -> Self {
        Self { axis, orthogonal }
    }

    pub fn perp(self) -> Self {
        Self::new(self.axis, !self.orthogonal)
    }

    /// The states on which this measurement yields `outcome`.
    pub fn outcome_set(self, outcome: u8) -> Property {
        let one = if self.orthogonal {
            self.axis.plus().complement()
        } else {
            self.axis.plus()
        };
        if outcome == 1 {
            one
        } else {
            one.complement()
        }
    }
}

impl fmt::Display for ToyMeasurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}{}", self.axis.letter(), if self.orthogonal { "'" } else { "" })
    }
}

impl FromStr for ToyMeasurement {
    type Err = ToyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (body, orthogonal) = match t.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (t, false),
        };
        let axis = match body.trim_start_matches('m').trim_start_matches('_') {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            _ => return Err(ToyError::UnknownMeasurement(t.to_string())),
        };
        Ok(Self::new(axis, orthogonal))
    }
}

impl Serialize for ToyMeasurement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn measure(ontic: OnticState, m: ToyMeasurement) -> u8 {
    m.outcome_set(1).contains(ontic) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ToySystem {
    ontic: OnticState,
    epistemic: EpistemicState,
}

impl ToySystem {
    pub fn new(ontic: OnticState, epistemic: EpistemicState) -> Result<Self, ToyError> {
        if !epistemic.members().contains(ontic) {
            return Err(ToyError::OnticOutsideEpistemic {
                ontic,
                epistemic: epistemic.members(),
            });
        }
        Ok(Self { ontic, epistemic })
    }

    /// The ontic state with nothing known about it.
    pub fn unknown(ontic: OnticState) -> Self {
        Self {
            ontic,
            epistemic: EpistemicState::ignorance(),
        }
    }

    pub fn ontic(&self) -> OnticState {
        self.ontic
    }

    pub fn epistemic(&self) -> EpistemicState {
        self.epistemic
    }
}

/// What a measurement does to the ontic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Disturbance {
    /// Uniform resampling within the outcome set; the observer keeps only
    /// the latest outcome.
    #[default]
    Resample,
    /// Hypothetical ontic access: the state is untouched and outcomes
    /// accumulate by intersection.
    None,
}

/// Measures with the knowledge-balance-preserving disturbance.
pub fn apply_measurement<R: Rng + ?Sized>(sys: &ToySystem, m: ToyMeasurement, rng: &mut R) -> (u8, ToySystem) {
    apply_measurement_with(sys, m, Disturbance::Resample, rng)
}

pub fn apply_measurement_with<R: Rng + ?Sized>(
    sys: &ToySystem,
    m: ToyMeasurement,
    disturbance: Disturbance,
    rng: &mut R,
) -> (u8, ToySystem) {
    let outcome = measure(sys.ontic, m);
    let set = m.outcome_set(outcome);
    let next = match disturbance {
        Disturbance::Resample => {
            let members: Vec<OnticState> = set.members().collect();
            ToySystem {
                ontic: members[rng.gen_range(0..members.len())],
                epistemic: EpistemicState { members: set },
            }
        }
        Disturbance::None => ToySystem {
            ontic: sys.ontic,
            epistemic: EpistemicState {
                members: sys.epistemic.members().meet(set),
            },
        },
    };
    (outcome, next)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementSequence(Vec<ToyMeasurement>);

impl MeasurementSequence {
    pub fn new(items: Vec<ToyMeasurement>) -> Result<Self, ToyError> {
        if items.is_empty() {
            return Err(ToyError::EmptySequence);
        }
        Ok(Self(items))
    }

    pub fn items(&self) -> &[ToyMeasurement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Comma-separated names, e.g. `mz,mx,mz'`.
impl FromStr for MeasurementSequence {
    type Err = ToyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let items = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(ToyMeasurement::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(items)
    }
}

impl fmt::Display for MeasurementSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledRun {
    pub outcomes: BitString,
    pub final_system: ToySystem,
}

pub fn run_sequence_sampled<R: Rng + ?Sized>(
    seq: &MeasurementSequence,
    start: &ToySystem,
    disturbance: Disturbance,
    rng: &mut R,
) -> SampledRun {
    let mut sys = *start;
    let mut outcomes = BitString::with_capacity(seq.len());
    for &m in seq.items() {
        let (bit, next) = apply_measurement_with(&sys, m, disturbance, rng);
        outcomes.push(bit);
        sys = next;
    }
    SampledRun {
        outcomes,
        final_system: sys,
    }
}

/// Exact joint law of outcome strings and the final ontic state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    joint: BTreeMap<(BitString, OnticState), BigRational>,
}

impl ExactDistribution {
    /// Marginal over outcome strings.
    pub fn outcomes(&self) -> BTreeMap<BitString, BigRational> {
        let mut out: BTreeMap<BitString, BigRational> = BTreeMap::new();
        for ((bits, _), w) in &self.joint {
            *out.entry(bits.clone()).or_insert_with(BigRational::zero) += w;
        }
        out
    }

    pub fn probability(&self, outcomes: &BitString) -> BigRational {
        self.joint
            .iter()
            .filter(|((b, _), _)| b == outcomes)
            .map(|(_, w)| w.clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Probability that the outcome string satisfies `pred`.
    pub fn probability_where(&self, mut pred: impl FnMut(&BitString) -> bool) -> BigRational {
        self.joint
            .iter()
            .filter(|((b, _), _)| pred(b))
            .map(|(_, w)| w.clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Probability that outcome `i` equals outcome `j`.
    pub fn agreement(&self, i: usize, j: usize) -> BigRational {
        self.probability_where(|b| b.get(i) == b.get(j))
    }

    /// Final ontic law conditioned on the observed outcomes, or `None` if
    /// they have probability zero.
    pub fn posterior(&self, outcomes: &BitString) -> Option<[BigRational; 4]> {
        let total = self.probability(outcomes);
        if total.is_zero() {
            return None;
        }
        let mut post: [BigRational; 4] = Default::default();
        for ((b, t), w) in &self.joint {
            if b == outcomes {
                post[t.index()] += w / &total;
            }
        }
        Some(post)
    }
}

/// Propagates the law over the four ontic states through `seq`, starting
/// uniform over `start`.
pub fn run_sequence_exact(seq: &MeasurementSequence, start: &EpistemicState, disturbance: Disturbance) -> ExactDistribution {
    let n = start.members().len();
    let w0 = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut joint: BTreeMap<(BitString, OnticState), BigRational> = start
        .members()
        .members()
        .map(|t| ((BitString::new(), t), w0.clone()))
        .collect();
    for &m in seq.items() {
        let mut next: BTreeMap<(BitString, OnticState), BigRational> = BTreeMap::new();
        for ((bits, t), w) in joint {
            let b = measure(t, m);
            let mut bits = bits;
            bits.push(b);
            match disturbance {
                Disturbance::Resample => {
                    let set = m.outcome_set(b);
                    let share = w / BigInt::from(set.len());
                    for t2 in set.members() {
                        *next.entry((bits.clone(), t2)).or_insert_with(BigRational::zero) += &share;
                    }
                }
                Disturbance::None => {
                    *next.entry((bits, t)).or_insert_with(BigRational::zero) += w;
                }
            }
        }
        joint = next;
    }
    ExactDistribution { joint }
}

/// Renders a probability as `p/q`, including integers (`1/1`).
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyOp {
    Complement,
    Meet,
    Join,
    Implies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyValue {
    Set(Property),
    Bit(u8),
}

/// `Complement` ignores `b`.
pub fn property_algebra(a: Property, b: Property, op: PropertyOp) -> PropertyValue {
    match op {
        PropertyOp::Complement => PropertyValue::Set(a.complement()),
        PropertyOp::Meet => PropertyValue::Set(a.meet(b)),
        PropertyOp::Join => PropertyValue::Set(a.join(b)),
        PropertyOp::Implies => PropertyValue::Bit(a.implies(b) as u8),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetPrediction {
    Determined { bit: u8 },
    Undetermined {
        #[serde(serialize_with = "ser_ratio")]
        p_one: BigRational,
    },
}

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub target: ToyMeasurement,
    pub disturbance: Disturbance,
    /// Ontic states the observer cannot rule out.
    pub epistemic: EpistemicState,
    pub balance_violated: bool,
    /// Set when the knowledge pins down the ontic state.
    pub ontic: Option<OnticState>,
    pub prediction: TargetPrediction,
}

/// Predicts `target` from recorded outcomes, conditioning the exact law
/// from complete ignorance on them.
pub fn classicality_experiment(
    known: &[(ToyMeasurement, u8)],
    target: ToyMeasurement,
    disturbance: Disturbance,
) -> Result<Prediction, ToyError> {
    if let Some(&(_, b)) = known.iter().find(|(_, b)| *b > 1) {
        return Err(ToyError::BadOutcome(b));
    }
    let posterior = if disturbance == Disturbance::None {
        // Outcomes are deterministic and the state never moves, so the
        // posterior is uniform over the states consistent with every answer.
        let support = known
            .iter()
            .fold(Property::FULL, |acc, &(m, b)| acc.meet(m.outcome_set(b)));
        if support == Property::EMPTY {
            return Err(ToyError::InconsistentKnowledge);
        }
        let share = BigRational::new(BigInt::one(), BigInt::from(support.len()));
        OnticState::ALL.map(|t| if support.contains(t) { share.clone() } else { BigRational::zero() })
    } else if known.is_empty() {
        let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
        [quarter.clone(), quarter.clone(), quarter.clone(), quarter]
    } else {
        let seq = MeasurementSequence::new(known.iter().map(|&(m, _)| m).collect())?;
        let observed: BitString = known.iter().map(|&(_, b)| b).collect();
        run_sequence_exact(&seq, &EpistemicState::ignorance(), disturbance)
            .posterior(&observed)
            .ok_or(ToyError::InconsistentKnowledge)?
    };
    let support: Property = OnticState::ALL
        .into_iter()
        .filter(|t| !posterior[t.index()].is_zero())
        .collect();
    let epistemic = EpistemicState::new(support)?;
    let p_one = target
        .outcome_set(1)
        .members()
        .map(|t| posterior[t.index()].clone())
        .fold(BigRational::zero(), |a, b| a + b);
    let prediction = if p_one.is_zero() {
        TargetPrediction::Determined { bit: 0 }
    } else if p_one.is_one() {
        TargetPrediction::Determined { bit: 1 }
    } else {
        TargetPrediction::Undetermined { p_one }
    };
    Ok(Prediction {
        target,
        disturbance,
        epistemic,
        balance_violated: epistemic.violates_balance(),
        ontic: (support.len() == 1).then(|| support.members().next().expect("nonempty")),
        prediction,
    })
}
