//! Rate-independent reaction templates.
//!
//! Each instantiation adds uniquely suffixed species (`start_{i}`,
//! `done_{i}`, `{v}p_{i}`, ...) and a fixed set of reactions labeled
//! `{kind}.{i}.{ref}`, where `ref` is the reaction's number inside the
//! template (e.g. `copy.2.4` is the restore step of copy module 2).
//!
//! Modules run one after another: a module is triggered by a molecule of
//! its `start` species and reports completion with a molecule of its
//! `done` species. [`chain`] links one module's `done` to the next
//! module's `start`.
//!
//! Absence of a species `X` is sensed through an indicator `X_ab` kept
//! alive by three maintenance reactions (see [`ensure_indicator`]).

use std::fmt;

use indexmap::IndexMap;

use crate::crn::{Crn, CrnError, IndicatorBinding, RateTier, ReactionId, SpeciesId, SpeciesKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleKind {
    Clear,
    Copy,
    Inc,
    Dec,
    Compare,
    Subtract,
    Multiply,
}

impl ModuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModuleKind::Clear => "clear",
            ModuleKind::Copy => "copy",
            ModuleKind::Inc => "inc",
            ModuleKind::Dec => "dec",
            ModuleKind::Compare => "compare",
            ModuleKind::Subtract => "subtract",
            ModuleKind::Multiply => "multiply",
        }
    }

    /// Number of template reactions, excluding indicator maintenance and
    /// link reactions.
    pub fn template_reaction_count(self) -> Option<usize> {
        match self {
            ModuleKind::Clear | ModuleKind::Copy => Some(5),
            ModuleKind::Inc | ModuleKind::Dec => Some(7),
            ModuleKind::Compare => Some(10),
            ModuleKind::Subtract => Some(1),
            ModuleKind::Multiply => None,
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Inc,
    Dec,
}

/// One instantiated template.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleInstance {
    pub kind: ModuleKind,
    pub index: u32,
    /// Trigger species. For a comparison this is its fuel.
    pub start: SpeciesId,
    /// Completion signal. A standalone comparison has none; its outcome is
    /// read from `t1`/`t2`/`t3`.
    pub done: Option<SpeciesId>,
    pub locals: IndexMap<&'static str, SpeciesId>,
    /// Reactions owned by this instance, all labeled `{kind}.{index}.`.
    pub reactions: Vec<ReactionId>,
    /// Indicator that must be present before `done` may be handed on,
    /// i.e. the module's clean-up has finished.
    pub gate: Option<SpeciesId>,
    /// Sub-modules of a composite (multiply) instance.
    pub children: Vec<ModuleInstance>,
}

impl ModuleInstance {
    pub fn label_prefix(&self) -> String {
        format!("{}.{}.", self.kind, self.index)
    }

    pub fn local(&self, role: &str) -> SpeciesId {
        self.locals[role]
    }
}

/// Returns the absence indicator binding for `species`, creating the
/// indicator `{name}_ab` and its maintenance reactions on first use:
///
/// * generate: `0 -> X_ab` (slow)
/// * consume: `X + X_ab -> X` (fast)
/// * cap: `2 X_ab -> X_ab` (fast)
///
/// The indicator starts at 1 iff the indicated species starts at 0.
pub fn ensure_indicator(crn: &mut Crn, species: SpeciesId) -> Result<IndicatorBinding, CrnError> {
    if let Some(b) = crn.indicator_of(species) {
        return Ok(b.clone());
    }
    let name = format!("{}_ab", crn.name(species));
    let init = u64::from(crn.species(species).initial_count == 0);
    let ab = crn.add_species(&name, init, SpeciesKind::AbsenceIndicator)?;
    let g = crn.add_reaction(&[], &[(ab, 1)], RateTier::Slow, true, format!("{name}.generate"))?;
    let c = crn.add_reaction(
        &[(species, 1), (ab, 1)],
        &[(species, 1)],
        RateTier::Fast,
        true,
        format!("{name}.consume"),
    )?;
    let k = crn.add_reaction(&[(ab, 2)], &[(ab, 1)], RateTier::Fast, true, format!("{name}.cap"))?;
    let binding = IndicatorBinding {
        indicated: species,
        indicator: ab,
        maintenance: [g, c, k],
    };
    crn.indicators.push(binding.clone());
    Ok(binding)
}

/// Re-derives every indicator's initial count from its indicated species,
/// for use after initial counts were changed.
pub fn refresh_indicator_initials(crn: &mut Crn) {
    let updates: Vec<_> = crn
        .indicators
        .iter()
        .map(|b| (b.indicator, u64::from(crn.species(b.indicated).initial_count == 0)))
        .collect();
    for (id, init) in updates {
        crn.set_initial(id, init);
    }
}

/// Small helper that labels reactions for one instance.
struct Emit<'a> {
    crn: &'a mut Crn,
    prefix: String,
    ids: Vec<ReactionId>,
}

impl<'a> Emit<'a> {
    fn new(crn: &'a mut Crn, kind: ModuleKind, idx: u32) -> Self {
        Self {
            crn,
            prefix: format!("{kind}.{idx}."),
            ids: Vec::new(),
        }
    }

    fn species(&mut self, name: String, init: u64, kind: SpeciesKind) -> Result<SpeciesId, CrnError> {
        self.crn.add_species(&name, init, kind)
    }

    fn r(
        &mut self,
        reference: &str,
        reactants: &[(SpeciesId, u32)],
        products: &[(SpeciesId, u32)],
        tier: RateTier,
    ) -> Result<(), CrnError> {
        let id = self
            .crn
            .add_reaction(reactants, products, tier, false, format!("{}{reference}", self.prefix))?;
        self.ids.push(id);
        Ok(())
    }
}

fn signals(e: &mut Emit<'_>, idx: u32) -> Result<(SpeciesId, SpeciesId), CrnError> {
    let start = e.species(format!("start_{idx}"), 0, SpeciesKind::SignalStart)?;
    let done = e.species(format!("done_{idx}"), 0, SpeciesKind::SignalDone)?;
    Ok((start, done))
}

/// Clear: drives `target` to zero.
///
/// ```text
/// 1  start + var + done_ab -> var' + start   slow
/// 2  start + var_ab        -> done           veryslow
/// 3  2 done                -> done           fast
/// 4  done + var'           -> done           slow
/// 5  start + done          -> done           slow
/// ```
pub fn instantiate_clear(crn: &mut Crn, target: SpeciesId, idx: u32) -> Result<ModuleInstance, CrnError> {
    transfer(crn, ModuleKind::Clear, target, None, idx)
}

/// Copy: adds the count of `source` to `dest`, restoring `source`.
/// Identical to clear except step 4, `done + var' -> done + var + output`.
pub fn instantiate_copy(
    crn: &mut Crn,
    source: SpeciesId,
    dest: SpeciesId,
    idx: u32,
) -> Result<ModuleInstance, CrnError> {
    if source == dest {
        return Err(CrnError::SelfChain(format!("copy.{idx}")));
    }
    transfer(crn, ModuleKind::Copy, source, Some(dest), idx)
}

fn transfer(
    crn: &mut Crn,
    kind: ModuleKind,
    var: SpeciesId,
    output: Option<SpeciesId>,
    idx: u32,
) -> Result<ModuleInstance, CrnError> {
    let vname = crn.name(var).to_string();
    let var_ab = ensure_indicator(crn, var)?.indicator;
    let mut e = Emit::new(crn, kind, idx);
    let (start, done) = signals(&mut e, idx)?;
    let prime = e.species(format!("{vname}p_{idx}"), 0, SpeciesKind::TempPrime)?;
    let done_ab = ensure_indicator(e.crn, done)?.indicator;

    e.r("1", &[(start, 1), (var, 1), (done_ab, 1)], &[(prime, 1), (start, 1)], RateTier::Slow)?;
    e.r("2", &[(start, 1), (var_ab, 1)], &[(done, 1)], RateTier::VerySlow)?;
    e.r("3", &[(done, 2)], &[(done, 1)], RateTier::Fast)?;
    match output {
        None => e.r("4", &[(done, 1), (prime, 1)], &[(done, 1)], RateTier::Slow)?,
        Some(out) => e.r(
            "4",
            &[(done, 1), (prime, 1)],
            &[(done, 1), (var, 1), (out, 1)],
            RateTier::Slow,
        )?,
    }
    e.r("5", &[(start, 1), (done, 1)], &[(done, 1)], RateTier::Slow)?;
    let reactions = e.ids;

    // Copies hand off only once the primes are gone.
    let gate = match kind {
        ModuleKind::Copy => Some(ensure_indicator(crn, prime)?.indicator),
        _ => None,
    };
    let mut locals = IndexMap::new();
    locals.insert("var", var);
    locals.insert("var_prime", prime);
    if let Some(out) = output {
        locals.insert("output", out);
    }
    Ok(ModuleInstance {
        kind,
        index: idx,
        start,
        done: Some(done),
        locals,
        reactions,
        gate,
        children: Vec::new(),
    })
}

/// Increment or decrement `target` by one.
///
/// ```text
/// 1    var + start + done_ab      -> var' + start               slow
/// 2    start + var_ab             -> done                       veryslow
/// 3    done + 2 var'              -> done + var + var' + var_rx fast
/// 4    var_rx                     -> 0                          slow
/// 5.1  done + var_rx_ab + var'    -> done                       slow  (dec)
/// 5.2  done + var_rx_ab + var'    -> done + 2 var               slow  (inc)
/// 6    2 done                     -> done                       fast
/// 7    start + done               -> done                       slow
/// ```
///
/// Decrementing zero leaves zero. Incrementing zero also leaves zero.
pub fn instantiate_incdec(
    crn: &mut Crn,
    target: SpeciesId,
    direction: Direction,
    idx: u32,
) -> Result<ModuleInstance, CrnError> {
    let kind = match direction {
        Direction::Inc => ModuleKind::Inc,
        Direction::Dec => ModuleKind::Dec,
    };
    let vname = crn.name(target).to_string();
    let var_ab = ensure_indicator(crn, target)?.indicator;
    let mut e = Emit::new(crn, kind, idx);
    let (start, done) = signals(&mut e, idx)?;
    let prime = e.species(format!("{vname}p_{idx}"), 0, SpeciesKind::TempPrime)?;
    let rx = e.species(format!("{vname}rx_{idx}"), 0, SpeciesKind::TempPrime)?;
    let done_ab = ensure_indicator(e.crn, done)?.indicator;
    let rx_ab = ensure_indicator(e.crn, rx)?.indicator;
    let var = target;

    e.r("1", &[(var, 1), (start, 1), (done_ab, 1)], &[(prime, 1), (start, 1)], RateTier::Slow)?;
    e.r("2", &[(start, 1), (var_ab, 1)], &[(done, 1)], RateTier::VerySlow)?;
    e.r(
        "3",
        &[(done, 1), (prime, 2)],
        &[(done, 1), (var, 1), (prime, 1), (rx, 1)],
        RateTier::Fast,
    )?;
    e.r("4", &[(rx, 1)], &[], RateTier::Slow)?;
    match direction {
        Direction::Dec => e.r("5.1", &[(done, 1), (rx_ab, 1), (prime, 1)], &[(done, 1)], RateTier::Slow)?,
        Direction::Inc => e.r(
            "5.2",
            &[(done, 1), (rx_ab, 1), (prime, 1)],
            &[(done, 1), (var, 2)],
            RateTier::Slow,
        )?,
    }
    e.r("6", &[(done, 2)], &[(done, 1)], RateTier::Fast)?;
    e.r("7", &[(start, 1), (done, 1)], &[(done, 1)], RateTier::Slow)?;
    let reactions = e.ids;

    let gate = Some(ensure_indicator(crn, prime)?.indicator);
    let mut locals = IndexMap::new();
    locals.insert("var", var);
    locals.insert("var_prime", prime);
    locals.insert("var_rx", rx);
    Ok(ModuleInstance {
        kind,
        index: idx,
        start,
        done: Some(done),
        locals,
        reactions,
        gate,
        children: Vec::new(),
    })
}

/// Three-way comparison of the working copies `a` and `b`, which it
/// destroys. One fuel molecule yields exactly one outcome token:
/// `t1` for a = b, `t2` for a > b, `t3` for a < b.
///
/// ```text
/// 1      a + b                 -> 0                       slow
/// 2.1    fuel + a_ab + b_ab    -> a_ab + b_ab + t1        slow
/// 2.2    fuel + a + b_ab       -> a + b_ab + t2           slow
/// 2.3    fuel + a_ab + b       -> a_ab + b + t3           slow
/// 3.1.1  a_ab + b_ab + t2      -> a_ab + b_ab             slow
/// 3.1.2  a_ab + b_ab + t3      -> a_ab + b_ab             slow
/// 3.2.1  a + b_ab + t1         -> a + b_ab                slow
/// 3.2.2  a + b_ab + t3         -> a + b_ab                slow
/// 3.3.1  a_ab + b + t1         -> a_ab + b                slow
/// 3.3.2  a_ab + b + t2         -> a_ab + b                slow
/// ```
///
/// The scavenging rows keep their context species as catalysts.
pub fn instantiate_compare(
    crn: &mut Crn,
    a: SpeciesId,
    b: SpeciesId,
    idx: u32,
) -> Result<ModuleInstance, CrnError> {
    compare_with_fuel(crn, a, b, idx, 1)
}

fn compare_with_fuel(
    crn: &mut Crn,
    a: SpeciesId,
    b: SpeciesId,
    idx: u32,
    fuel_init: u64,
) -> Result<ModuleInstance, CrnError> {
    if a == b {
        return Err(CrnError::SelfChain(format!("compare.{idx}")));
    }
    let a_ab = ensure_indicator(crn, a)?.indicator;
    let b_ab = ensure_indicator(crn, b)?.indicator;
    let mut e = Emit::new(crn, ModuleKind::Compare, idx);
    let fuel = e.species(format!("fuel_{idx}"), fuel_init, SpeciesKind::Fuel)?;
    let t1 = e.species(format!("t1_{idx}"), 0, SpeciesKind::DetectionT)?;
    let t2 = e.species(format!("t2_{idx}"), 0, SpeciesKind::DetectionT)?;
    let t3 = e.species(format!("t3_{idx}"), 0, SpeciesKind::DetectionT)?;
    let s = RateTier::Slow;

    e.r("1", &[(a, 1), (b, 1)], &[], s)?;
    e.r("2.1", &[(fuel, 1), (a_ab, 1), (b_ab, 1)], &[(a_ab, 1), (b_ab, 1), (t1, 1)], s)?;
    e.r("2.2", &[(fuel, 1), (a, 1), (b_ab, 1)], &[(a, 1), (b_ab, 1), (t2, 1)], s)?;
    e.r("2.3", &[(fuel, 1), (a_ab, 1), (b, 1)], &[(a_ab, 1), (b, 1), (t3, 1)], s)?;
    for (reference, ctx, wrong) in [
        ("3.1.1", [a_ab, b_ab], t2),
        ("3.1.2", [a_ab, b_ab], t3),
        ("3.2.1", [a, b_ab], t1),
        ("3.2.2", [a, b_ab], t3),
        ("3.3.1", [a_ab, b], t1),
        ("3.3.2", [a_ab, b], t2),
    ] {
        e.r(reference, &[(ctx[0], 1), (ctx[1], 1), (wrong, 1)], &[(ctx[0], 1), (ctx[1], 1)], s)?;
    }
    let reactions = e.ids;

    let mut locals = IndexMap::new();
    locals.insert("a", a);
    locals.insert("b", b);
    locals.insert("fuel", fuel);
    locals.insert("t1", t1);
    locals.insert("t2", t2);
    locals.insert("t3", t3);
    Ok(ModuleInstance {
        kind: ModuleKind::Compare,
        index: idx,
        start: fuel,
        done: None,
        locals,
        reactions,
        gate: None,
        children: Vec::new(),
    })
}

/// Monus subtraction `target <- max(target - temp, 0)` by annihilation,
/// `target + temp -> 0` (fast). The annihilation is always active; the
/// instance's start/done pair only gives it a place in the module chain
/// (`start -> done`, fast, labeled `subtract.{i}.link.pass`).
pub fn instantiate_subtract(
    crn: &mut Crn,
    target: SpeciesId,
    temp: SpeciesId,
    idx: u32,
) -> Result<ModuleInstance, CrnError> {
    if target == temp {
        return Err(CrnError::SelfChain(format!("subtract.{idx}")));
    }
    let mut e = Emit::new(crn, ModuleKind::Subtract, idx);
    let (start, done) = signals(&mut e, idx)?;
    e.r("1", &[(target, 1), (temp, 1)], &[], RateTier::Fast)?;
    let reactions = e.ids;
    crn.add_reaction(
        &[(start, 1)],
        &[(done, 1)],
        RateTier::Fast,
        false,
        format!("subtract.{idx}.link.pass"),
    )?;
    let mut locals = IndexMap::new();
    locals.insert("var", target);
    locals.insert("temp", temp);
    Ok(ModuleInstance {
        kind: ModuleKind::Subtract,
        index: idx,
        start,
        done: Some(done),
        locals,
        reactions,
        gate: None,
        children: Vec::new(),
    })
}

/// Links `prev.done` to `next.start` with a very slow reaction. When
/// `prev` has a gate indicator the link also requires it (as a catalyst),
/// so the hand-off waits for the module's clean-up.
pub fn chain(crn: &mut Crn, prev: &ModuleInstance, next: &ModuleInstance) -> Result<ReactionId, CrnError> {
    let label = format!("link.{}.{}", prev.index, next.index);
    chain_labeled(crn, prev, next.start, RateTier::VerySlow, label)
}

fn chain_labeled(
    crn: &mut Crn,
    prev: &ModuleInstance,
    next_start: SpeciesId,
    tier: RateTier,
    label: String,
) -> Result<ReactionId, CrnError> {
    let done = prev.done.ok_or_else(|| CrnError::SelfChain(prev.label_prefix()))?;
    if done == next_start || prev.start == next_start {
        return Err(CrnError::SelfChain(prev.label_prefix()));
    }
    let mut reactants = vec![(done, 1)];
    let mut products = vec![(next_start, 1)];
    if let Some(g) = prev.gate {
        reactants.push((g, 1));
        products.push((g, 1));
    }
    crn.add_reaction(&reactants, &products, tier, false, label)
}

/// Multiplication `dest <- dest + a * b` as a loop over the counter
/// `cnt_{i}`:
///
/// ```text
/// copy(a -> cnt)
/// loop: compare(cnt, zero)           one fuel per test
///       t2 (cnt > 0): copy(b -> dest); dec(cnt); refuel
///       t1 (cnt = 0): done
/// ```
///
/// `zero` must be a species that stays at 0, so the comparison never
/// consumes the counter. `next_index` supplies indices for the
/// sub-modules. Conversion reactions are labeled `multiply.{i}.link.*`.
pub fn instantiate_multiply(
    crn: &mut Crn,
    a: SpeciesId,
    b: SpeciesId,
    dest: SpeciesId,
    zero: SpeciesId,
    idx: u32,
    next_index: &mut u32,
) -> Result<ModuleInstance, CrnError> {
    let mut alloc = || {
        let i = *next_index;
        *next_index += 1;
        i
    };
    let cnt = crn.add_species(&format!("cnt_{idx}"), 0, SpeciesKind::Register)?;
    let done = crn.add_species(&format!("done_{idx}"), 0, SpeciesKind::SignalDone)?;

    let load = instantiate_copy(crn, a, cnt, alloc())?;
    let test = compare_with_fuel(crn, cnt, zero, alloc(), 0)?;
    let add = instantiate_copy(crn, b, dest, alloc())?;
    let dec = instantiate_incdec(crn, cnt, Direction::Dec, alloc())?;

    let fuel = test.start;
    let link = |name: &str| format!("multiply.{idx}.link.{name}");
    let reactions = vec![
        chain_labeled(crn, &load, fuel, RateTier::VerySlow, link("arm"))?,
        crn.add_reaction(&[(test.local("t2"), 1)], &[(add.start, 1)], RateTier::Fast, false, link("body"))?,
        chain_labeled(crn, &add, dec.start, RateTier::VerySlow, link("step"))?,
        chain_labeled(crn, &dec, fuel, RateTier::VerySlow, link("loop"))?,
        crn.add_reaction(&[(test.local("t1"), 1)], &[(done, 1)], RateTier::Fast, false, link("exit"))?,
    ];

    let mut locals = IndexMap::new();
    locals.insert("a", a);
    locals.insert("b", b);
    locals.insert("dest", dest);
    locals.insert("counter", cnt);
    Ok(ModuleInstance {
        kind: ModuleKind::Multiply,
        index: idx,
        start: load.start,
        done: Some(done),
        locals,
        reactions,
        gate: None,
        children: vec![load, test, add, dec],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{run_ensemble, SimConfig};

    fn var(crn: &mut Crn, name: &str, n: u64) -> SpeciesId {
        let id = crn.add_species(name, n, SpeciesKind::UserVariable).unwrap();
        crn.add_observable(id);
        id
    }

    fn refs(crn: &Crn, m: &ModuleInstance) -> Vec<String> {
        let prefix = m.label_prefix();
        m.reactions
            .iter()
            .map(|r| crn.reactions[r.0].label.strip_prefix(&prefix).unwrap().to_string())
            .collect()
    }

    /// Arms a standalone module and returns the modal final observables
    /// and their frequency.
    fn settle(mut crn: Crn, m: &ModuleInstance, runs: usize) -> (Vec<u64>, f64) {
        if m.kind != ModuleKind::Compare {
            crn.set_initial(m.start, 1);
        }
        refresh_indicator_initials(&mut crn);
        let s = run_ensemble(&crn, &SimConfig { seed: 100, ..SimConfig::default() }, runs).unwrap();
        assert_eq!(s.quiescent_runs, runs);
        (s.mode.clone(), s.mode_fraction())
    }

    #[test]
    fn template_shapes() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 0);
        let y = var(&mut crn, "y", 0);
        let z = var(&mut crn, "z", 0);
        let m1 = instantiate_clear(&mut crn, x, 1).unwrap();
        let m2 = instantiate_copy(&mut crn, x, y, 2).unwrap();
        let m3 = instantiate_incdec(&mut crn, x, Direction::Inc, 3).unwrap();
        let m4 = instantiate_incdec(&mut crn, y, Direction::Dec, 4).unwrap();
        let m5 = instantiate_compare(&mut crn, x, y, 5).unwrap();
        let m6 = instantiate_subtract(&mut crn, x, z, 6).unwrap();
        for m in [&m1, &m2, &m3, &m4, &m5, &m6] {
            assert_eq!(Some(m.reactions.len()), m.kind.template_reaction_count(), "{}", m.kind);
            for r in &m.reactions {
                assert!(!crn.reactions[r.0].is_maintenance);
            }
        }
        assert_eq!(refs(&crn, &m1), ["1", "2", "3", "4", "5"]);
        assert_eq!(refs(&crn, &m2), ["1", "2", "3", "4", "5"]);
        assert_eq!(refs(&crn, &m3), ["1", "2", "3", "4", "5.2", "6", "7"]);
        assert_eq!(refs(&crn, &m4), ["1", "2", "3", "4", "5.1", "6", "7"]);
        assert_eq!(
            refs(&crn, &m5),
            ["1", "2.1", "2.2", "2.3", "3.1.1", "3.1.2", "3.2.1", "3.2.2", "3.3.1", "3.3.2"]
        );
        assert_eq!(refs(&crn, &m6), ["1"]);
        assert_eq!(crn.reactions[m2.reactions[0].0].label, "copy.2.1");
        assert!(crn.validate_structure().is_ok());
    }

    #[test]
    fn catalysts_and_tiers() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 0);
        let y = var(&mut crn, "y", 0);
        let m = instantiate_copy(&mut crn, x, y, 1).unwrap();
        let r = |i: usize| &crn.reactions[m.reactions[i].0];
        assert_eq!(r(0).catalysts(), [m.start]);
        assert_eq!(r(3).catalysts(), [m.done.unwrap()]);
        assert_eq!(r(3).net_change(x), 1);
        assert_eq!(r(3).net_change(y), 1);
        assert_eq!(r(2).tier, RateTier::Fast);
        assert_eq!(r(1).tier, RateTier::VerySlow);
        assert_eq!(r(4).tier, RateTier::Slow);

        let c = instantiate_compare(&mut crn, x, y, 2).unwrap();
        for &id in &c.reactions[4..] {
            let re = &crn.reactions[id.0];
            assert_eq!(re.catalysts().len(), 2, "{}", re.label);
            assert!(re.products.len() == 2);
        }
        let s = instantiate_subtract(&mut crn, x, y, 3).unwrap();
        assert!(crn.reactions[s.reactions[0].0].products.is_empty());
        assert_eq!(crn.reactions[s.reactions[0].0].tier, RateTier::Fast);
    }

    #[test]
    fn indicators_are_shared() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 0);
        let a = ensure_indicator(&mut crn, x).unwrap();
        let n = crn.reactions.len();
        let b = ensure_indicator(&mut crn, x).unwrap();
        assert_eq!(a, b);
        assert_eq!(crn.reactions.len(), n);
        assert_eq!(crn.name(a.indicator), "x_ab");
        assert_eq!(crn.species(a.indicator).initial_count, 1);
        for (r, label) in a.maintenance.iter().zip(["generate", "consume", "cap"]) {
            assert!(crn.reactions[r.0].is_maintenance);
            assert_eq!(crn.reactions[r.0].label, format!("x_ab.{label}"));
        }
        crn.set_initial(x, 4);
        refresh_indicator_initials(&mut crn);
        assert_eq!(crn.species(a.indicator).initial_count, 0);
    }

    #[test]
    fn instances_use_distinct_species() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 0);
        let y = var(&mut crn, "y", 0);
        let a = instantiate_copy(&mut crn, x, y, 1).unwrap();
        let b = instantiate_copy(&mut crn, x, y, 2).unwrap();
        assert_ne!(a.start, b.start);
        assert_ne!(a.local("var_prime"), b.local("var_prime"));
        assert!(instantiate_copy(&mut crn, x, y, 1).is_err());
        assert!(instantiate_copy(&mut crn, x, x, 3).is_err());
    }

    #[test]
    fn chaining() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 0);
        let y = var(&mut crn, "y", 0);
        let a = instantiate_clear(&mut crn, x, 1).unwrap();
        let b = instantiate_copy(&mut crn, x, y, 2).unwrap();
        let c = instantiate_clear(&mut crn, y, 3).unwrap();
        let l1 = chain(&mut crn, &a, &b).unwrap();
        let l2 = chain(&mut crn, &b, &c).unwrap();
        assert_eq!(crn.reactions[l1.0].label, "link.1.2");
        assert_eq!(crn.reactions[l1.0].reactants, [(a.done.unwrap(), 1)]);
        assert_eq!(crn.reactions[l1.0].tier, RateTier::VerySlow);
        assert_eq!(crn.reactions[l2.0].catalysts(), [b.gate.unwrap()]);
        assert!(chain(&mut crn, &a, &a).is_err());
    }

    #[test]
    fn clear_and_copy_run() {
        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 5);
        let m = instantiate_clear(&mut crn, x, 1).unwrap();
        let (mode, frac) = settle(crn, &m, 40);
        assert_eq!(mode, [0]);
        assert!(frac >= 0.95);

        let mut crn = Crn::new();
        let x = var(&mut crn, "x", 7);
        let y = var(&mut crn, "y", 2);
        let m = instantiate_copy(&mut crn, x, y, 1).unwrap();
        let (mode, frac) = settle(crn, &m, 40);
        assert_eq!(mode, [7, 9]);
        assert!(frac >= 0.95);
    }

    #[test]
    fn incdec_run() {
        for (n, dir, want) in [
            (3, Direction::Inc, 4),
            (3, Direction::Dec, 2),
            (1, Direction::Dec, 0),
            (0, Direction::Dec, 0),
            (0, Direction::Inc, 0),
        ] {
            let mut crn = Crn::new();
            let x = var(&mut crn, "x", n);
            let m = instantiate_incdec(&mut crn, x, dir, 1).unwrap();
            let (mode, frac) = settle(crn, &m, 40);
            assert_eq!(mode, [want], "{n} {dir:?}");
            assert!(frac >= 0.9, "{n} {dir:?}: {frac}");
        }
    }

    #[test]
    fn subtraction_is_monus() {
        for (a, b) in [(0, 0), (0, 3), (3, 0), (2, 5), (5, 2), (4, 4)] {
            let mut crn = Crn::new();
            let x = var(&mut crn, "x", a);
            let t = crn.add_species("_tmp0", b, SpeciesKind::Register).unwrap();
            let m = instantiate_subtract(&mut crn, x, t, 1).unwrap();
            let (mode, frac) = settle(crn, &m, 10);
            assert_eq!(mode, [a.saturating_sub(b)]);
            assert_eq!(frac, 1.0);
        }
    }

    #[test]
    fn compare_outcomes() {
        for (a, b, winner) in [(3, 5, "t3"), (5, 3, "t2"), (4, 4, "t1"), (0, 0, "t1"), (0, 2, "t3")] {
            let mut crn = Crn::new();
            let sa = crn.add_species("a", a, SpeciesKind::Register).unwrap();
            let sb = crn.add_species("b", b, SpeciesKind::Register).unwrap();
            let m = instantiate_compare(&mut crn, sa, sb, 1).unwrap();
            for t in ["t1", "t2", "t3"] {
                crn.add_observable(m.local(t));
            }
            let (mode, frac) = settle(crn, &m, 40);
            let want: Vec<u64> = ["t1", "t2", "t3"].iter().map(|t| u64::from(*t == winner)).collect();
            assert_eq!(mode, want, "{a} vs {b}");
            assert!(frac >= 0.9, "{a} vs {b}: {frac}");
        }
    }

    #[test]
    fn multiply_runs() {
        for (a, b) in [(2, 3), (0, 5), (3, 0), (1, 4)] {
            let mut crn = Crn::new();
            let sa = var(&mut crn, "a", a);
            let sb = var(&mut crn, "b", b);
            let d = var(&mut crn, "d", 0);
            let zero = crn.add_species("c0", 0, SpeciesKind::Constant).unwrap();
            let mut next = 2;
            let m = instantiate_multiply(&mut crn, sa, sb, d, zero, 1, &mut next).unwrap();
            assert_eq!(next, 6);
            assert_eq!(m.children.len(), 4);
            assert_eq!(crn.reactions[m.reactions[0].0].label, "multiply.1.link.arm");
            let (mode, frac) = settle(crn, &m, 30);
            assert_eq!(mode, [a, b, a * b], "{a} * {b}");
            assert!(frac >= 0.9, "{a} * {b}: {frac}");
        }
    }
}
