//! Chemical reaction networks: species, reactions, rate tiers and
//! stochastic mass-action propensities.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReactionId(pub usize);

impl fmt::Display for SpeciesId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ReactionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeciesKind {
    UserVariable,
    Register,
    Constant,
    SignalStart,
    SignalDone,
    TempPrime,
    AbsenceIndicator,
    DetectionT,
    Fuel,
}

impl SpeciesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeciesKind::UserVariable => "user-variable",
            SpeciesKind::Register => "register",
            SpeciesKind::Constant => "constant",
            SpeciesKind::SignalStart => "signal-start",
            SpeciesKind::SignalDone => "signal-done",
            SpeciesKind::TempPrime => "temp-prime",
            SpeciesKind::AbsenceIndicator => "absence-indicator",
            SpeciesKind::DetectionT => "detection-t",
            SpeciesKind::Fuel => "fuel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    pub id: SpeciesId,
    pub name: String,
    pub initial_count: u64,
    pub kind: SpeciesKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RateTier {
    Fast,
    Slow,
    VerySlow,
}

impl RateTier {
    pub const ALL: [RateTier; 3] = [RateTier::Fast, RateTier::Slow, RateTier::VerySlow];

    /// Parameter name used in emitted files.
    pub fn as_str(self) -> &'static str {
        match self {
            RateTier::Fast => "fast",
            RateTier::Slow => "slow",
            RateTier::VerySlow => "veryslow",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        RateTier::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for RateTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric values of the three rate tiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    pub fast: f64,
    pub slow: f64,
    pub veryslow: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            fast: 1000.0,
            slow: 1.0,
            veryslow: 0.01,
        }
    }
}

impl RateConfig {
    pub fn new(fast: f64, slow: f64, veryslow: f64) -> Result<Self, CrnError> {
        let rates = Self { fast, slow, veryslow };
        rates.check()?;
        Ok(rates)
    }

    pub fn check(&self) -> Result<(), CrnError> {
        let ok = self.veryslow.is_finite()
            && self.fast.is_finite()
            && self.veryslow > 0.0
            && self.slow > self.veryslow
            && self.fast > self.slow;
        if ok {
            Ok(())
        } else {
            Err(CrnError::BadRates(*self))
        }
    }

    pub fn get(&self, tier: RateTier) -> f64 {
        match tier {
            RateTier::Fast => self.fast,
            RateTier::Slow => self.slow,
            RateTier::VerySlow => self.veryslow,
        }
    }

    /// All three rates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            fast: self.fast * factor,
            slow: self.slow * factor,
            veryslow: self.veryslow * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    /// `(species, stoichiometry)` sorted by species id, no duplicates.
    pub reactants: Vec<(SpeciesId, u32)>,
    pub products: Vec<(SpeciesId, u32)>,
    pub tier: RateTier,
    pub is_maintenance: bool,
    pub label: String,
}

impl Reaction {
    /// Net change in `species` when this reaction fires once.
    pub fn net_change(&self, species: SpeciesId) -> i64 {
        let side = |v: &[(SpeciesId, u32)]| {
            v.iter()
                .find(|(s, _)| *s == species)
                .map_or(0, |(_, n)| i64::from(*n))
        };
        side(&self.products) - side(&self.reactants)
    }

    /// Species that appear with equal stoichiometry on both sides.
    pub fn catalysts(&self) -> Vec<SpeciesId> {
        self.reactants
            .iter()
            .filter(|r| self.products.contains(r))
            .map(|(s, _)| *s)
            .collect()
    }
}

/// An absence indicator `X_ab` for species `X` and its three maintenance
/// reactions: generate (`0 -> X_ab`, slow), consume (`X + X_ab -> X`, fast)
/// and cap (`2 X_ab -> X_ab`, fast).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorBinding {
    pub indicated: SpeciesId,
    pub indicator: SpeciesId,
    pub maintenance: [ReactionId; 3],
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrnError {
    #[error("duplicate species name '{0}'")]
    DuplicateName(String),
    #[error("reaction '{label}' references unknown species id {id}")]
    UnknownSpecies { label: String, id: usize },
    #[error("reaction '{label}' has a zero stoichiometry")]
    ZeroStoichiometry { label: String },
    #[error("species '{name}' has id {found}, expected {expected}")]
    NonDenseId { name: String, found: usize, expected: usize },
    #[error("observable '{0}' is not a species")]
    UnknownObservable(usize),
    #[error("network has no observables")]
    NoObservables,
    #[error("cannot chain module '{0}' to itself")]
    SelfChain(String),
    #[error("invalid rates fast={} slow={} veryslow={}: need fast > slow > veryslow > 0", .0.fast, .0.slow, .0.veryslow)]
    BadRates(RateConfig),
}

/// A reaction network under construction or ready for simulation.
#[derive(Debug, Clone, Default)]
pub struct Crn {
    pub species: Vec<Species>,
    pub reactions: Vec<Reaction>,
    pub observables: Vec<SpeciesId>,
    pub indicators: Vec<IndicatorBinding>,
    by_name: HashMap<String, SpeciesId>,
}

impl Crn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_species(
        &mut self,
        name: &str,
        initial_count: u64,
        kind: SpeciesKind,
    ) -> Result<SpeciesId, CrnError> {
        if self.by_name.contains_key(name) {
            return Err(CrnError::DuplicateName(name.to_string()));
        }
        let id = SpeciesId(self.species.len());
        self.species.push(Species {
            id,
            name: name.to_string(),
            initial_count,
            kind,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Appends a reaction. Repeated species on one side are merged.
    pub fn add_reaction(
        &mut self,
        reactants: &[(SpeciesId, u32)],
        products: &[(SpeciesId, u32)],
        tier: RateTier,
        is_maintenance: bool,
        label: impl Into<String>,
    ) -> Result<ReactionId, CrnError> {
        let label = label.into();
        let reactants = self.normalize_side(reactants, &label)?;
        let products = self.normalize_side(products, &label)?;
        let id = ReactionId(self.reactions.len());
        self.reactions.push(Reaction {
            reactants,
            products,
            tier,
            is_maintenance,
            label,
        });
        Ok(id)
    }

    fn normalize_side(
        &self,
        side: &[(SpeciesId, u32)],
        label: &str,
    ) -> Result<Vec<(SpeciesId, u32)>, CrnError> {
        let mut out: Vec<(SpeciesId, u32)> = Vec::with_capacity(side.len());
        for &(s, n) in side {
            if n == 0 {
                return Err(CrnError::ZeroStoichiometry { label: label.to_string() });
            }
            if s.0 >= self.species.len() {
                return Err(CrnError::UnknownSpecies { label: label.to_string(), id: s.0 });
            }
            match out.iter_mut().find(|(t, _)| *t == s) {
                Some(entry) => entry.1 += n,
                None => out.push((s, n)),
            }
        }
        out.sort_by_key(|(s, _)| *s);
        Ok(out)
    }

    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.by_name.get(name).copied()
    }

    pub fn species(&self, id: SpeciesId) -> &Species {
        &self.species[id.0]
    }

    pub fn name(&self, id: SpeciesId) -> &str {
        &self.species[id.0].name
    }

    pub fn set_initial(&mut self, id: SpeciesId, count: u64) {
        self.species[id.0].initial_count = count;
    }

    pub fn add_observable(&mut self, id: SpeciesId) {
        if !self.observables.contains(&id) {
            self.observables.push(id);
        }
    }

    pub fn initial_state(&self) -> Vec<u64> {
        self.species.iter().map(|s| s.initial_count).collect()
    }

    pub fn indicator_of(&self, species: SpeciesId) -> Option<&IndicatorBinding> {
        self.indicators.iter().find(|b| b.indicated == species)
    }

    pub fn is_indicator(&self, species: SpeciesId) -> bool {
        self.species[species.0].kind == SpeciesKind::AbsenceIndicator
    }

    /// Checks id density, name uniqueness and reaction references.
    pub fn validate_structure(&self) -> Result<(), Vec<CrnError>> {
        let mut errors = Vec::new();
        let mut seen = HashMap::new();
        for (i, s) in self.species.iter().enumerate() {
            if s.id.0 != i {
                errors.push(CrnError::NonDenseId {
                    name: s.name.clone(),
                    found: s.id.0,
                    expected: i,
                });
            }
            if seen.insert(s.name.as_str(), i).is_some() {
                errors.push(CrnError::DuplicateName(s.name.clone()));
            }
        }
        for r in &self.reactions {
            for &(s, n) in r.reactants.iter().chain(&r.products) {
                if s.0 >= self.species.len() {
                    errors.push(CrnError::UnknownSpecies { label: r.label.clone(), id: s.0 });
                }
                if n == 0 {
                    errors.push(CrnError::ZeroStoichiometry { label: r.label.clone() });
                }
            }
        }
        for o in &self.observables {
            if o.0 >= self.species.len() {
                errors.push(CrnError::UnknownObservable(o.0));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Structural checks plus the requirement that a compiled program
    /// exposes at least one observable.
    pub fn validate(&self) -> Result<(), Vec<CrnError>> {
        let mut errors = self.validate_structure().err().unwrap_or_default();
        if self.observables.is_empty() {
            errors.push(CrnError::NoObservables);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// Number of ways to choose `k` molecules out of `n`, as a float.
pub fn combinations(n: u64, k: u32) -> f64 {
    let k = u64::from(k);
    if n < k {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Stochastic mass-action propensity: the tier's rate constant times the
/// number of distinct reactant combinations in `state`.
pub fn propensity(reaction: &Reaction, state: &[u64], rates: &RateConfig) -> f64 {
    let mut a = rates.get(reaction.tier);
    for &(s, n) in &reaction.reactants {
        let x = state[s.0];
        if x < u64::from(n) {
            return 0.0;
        }
        a *= combinations(x, n);
    }
    a
}

/// Fires `reaction` once. Returns `false` (leaving `state` untouched) if
/// there are not enough reactant molecules.
pub fn apply(reaction: &Reaction, state: &mut [u64]) -> bool {
    if reaction
        .reactants
        .iter()
        .any(|&(s, n)| state[s.0] < u64::from(n))
    {
        return false;
    }
    for &(s, n) in &reaction.reactants {
        state[s.0] -= u64::from(n);
    }
    for &(s, n) in &reaction.products {
        state[s.0] += u64::from(n);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> (Crn, SpeciesId, SpeciesId) {
        let mut crn = Crn::new();
        let a = crn.add_species("a", 0, SpeciesKind::UserVariable).unwrap();
        let b = crn.add_species("b", 0, SpeciesKind::UserVariable).unwrap();
        (crn, a, b)
    }

    #[test]
    fn species_ids_are_dense() {
        let mut crn = Crn::new();
        assert_eq!(crn.add_species("x", 0, SpeciesKind::UserVariable).unwrap(), SpeciesId(0));
        let c = crn.add_species("c10", 10, SpeciesKind::Constant).unwrap();
        assert_eq!(crn.species(c).initial_count, 10);
        assert_eq!(
            crn.add_species("x", 1, SpeciesKind::UserVariable),
            Err(CrnError::DuplicateName("x".into()))
        );
    }

    #[test]
    fn add_reaction_checks() {
        let (mut crn, a, b) = ab();
        let r = crn
            .add_reaction(&[(a, 1), (b, 1)], &[], RateTier::Fast, false, "subtract.1.5.1")
            .unwrap();
        assert!(crn.reactions[r.0].products.is_empty());
        assert!(matches!(
            crn.add_reaction(&[(a, 0)], &[(b, 1)], RateTier::Slow, false, "bad"),
            Err(CrnError::ZeroStoichiometry { .. })
        ));
        assert!(matches!(
            crn.add_reaction(&[(SpeciesId(7), 1)], &[], RateTier::Slow, false, "bad"),
            Err(CrnError::UnknownSpecies { id: 7, .. })
        ));
    }

    #[test]
    fn repeated_reactants_merge() {
        let (mut crn, a, _) = ab();
        let r = crn.add_reaction(&[(a, 1), (a, 1)], &[(a, 1)], RateTier::Fast, false, "dimer").unwrap();
        assert_eq!(crn.reactions[r.0].reactants, vec![(a, 2)]);
    }

    #[test]
    fn propensity_counts_combinations() {
        let (mut crn, a, b) = ab();
        let r1 = crn.add_reaction(&[(a, 1), (b, 1)], &[], RateTier::Slow, false, "ab").unwrap();
        let r2 = crn.add_reaction(&[(a, 2)], &[(a, 1)], RateTier::Slow, false, "2a").unwrap();
        let rates = RateConfig::default();
        assert_eq!(propensity(&crn.reactions[r1.0], &[2, 3], &rates), 6.0);
        assert_eq!(propensity(&crn.reactions[r2.0], &[4, 0], &rates), 6.0);
        assert_eq!(propensity(&crn.reactions[r2.0], &[1, 0], &rates), 0.0);
    }

    #[test]
    fn combinations_match_enumeration() {
        for n in 0..12u64 {
            for k in 1..4u32 {
                let brute = match k {
                    1 => n,
                    2 => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).count() as u64,
                    _ => (0..n)
                        .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |l| (i, j, l))))
                        .count() as u64,
                };
                assert_eq!(combinations(n, k), brute as f64, "C({n},{k})");
            }
        }
    }

    #[test]
    fn validation() {
        let (mut crn, a, _) = ab();
        assert_eq!(crn.validate(), Err(vec![CrnError::NoObservables]));
        crn.add_observable(a);
        assert!(crn.validate().is_ok());
        crn.reactions.push(Reaction {
            reactants: vec![(SpeciesId(9), 1)],
            products: vec![],
            tier: RateTier::Slow,
            is_maintenance: false,
            label: "dangling".into(),
        });
        let errs = crn.validate().unwrap_err();
        assert_eq!(errs, vec![CrnError::UnknownSpecies { label: "dangling".into(), id: 9 }]);
    }

    #[test]
    fn rate_config_ordering() {
        assert!(RateConfig::default().check().is_ok());
        assert!(RateConfig::new(1.0, 1.0, 0.1).is_err());
        assert!(RateConfig::new(10.0, 1.0, 0.0).is_err());
        assert_eq!(RateConfig::default().scaled(2.0).veryslow, 0.02);
    }

    #[test]
    fn apply_refuses_negative_counts() {
        let (mut crn, a, b) = ab();
        let r = crn.add_reaction(&[(a, 2)], &[(b, 1)], RateTier::Slow, false, "r").unwrap();
        let mut state = vec![1, 0];
        assert!(!apply(&crn.reactions[r.0], &mut state));
        state[0] = 3;
        assert!(apply(&crn.reactions[r.0], &mut state));
        assert_eq!(state, [1, 1]);
    }
}
