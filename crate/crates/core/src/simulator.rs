//! Exact stochastic simulation (Gillespie direct method).
//!
//! Each step draws `u1, u2` from a ChaCha8 stream seeded with
//! [`SimConfig::seed`], advances time by `-ln(u1) / a0` and fires the first
//! reaction, in reaction-id order, whose cumulative propensity exceeds
//! `u2 * a0`. Propensities are kept in blocks whose sums are recomputed
//! exactly after every step, so the cumulative scan only touches one block.
//!
//! A run stops when the network is quiescent: no non-maintenance reaction
//! is enabled, neither in the current state nor with every indicator whose
//! indicated species is absent raised to one. Maintenance reactions keep
//! firing while a module is pending but never change an observable.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::crn::{combinations, Crn, CrnError, RateConfig, SpeciesId};

/// Name of the pseudo-random generator behind every trajectory.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

const BLOCK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: f64,
    pub max_steps: u64,
    pub rates: RateConfig,
    /// Species to record; `None` means the network's observables.
    pub observe: Option<Vec<String>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            horizon: 5000.0,
            max_steps: 5_000_000,
            rates: RateConfig::default(),
            observe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown observable '{0}'")]
    UnknownObservable(String),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("max_steps must be positive")]
    BadMaxSteps,
    #[error("ensemble needs at least one run")]
    NoRuns,
    #[error(transparent)]
    Crn(#[from] CrnError),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Quiescent,
    Horizon,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Quiescent => "quiescent",
            StopReason::Horizon => "horizon",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

/// Samples of the observed species, taken at t = 0 and whenever one of
/// them changes, plus the final state of every species.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub observed: Vec<SpeciesId>,
    pub times: Vec<f64>,
    /// Row-major, `observed.len()` counts per sample.
    pub samples: Vec<u64>,
    pub final_time: f64,
    pub final_state: Vec<u64>,
    pub steps: u64,
    pub stop: StopReason,
    /// Reaction index of every firing, when requested.
    pub firings: Option<Vec<u32>>,
    /// Time of every firing, when requested.
    pub firing_times: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[u64] {
        let w = self.observed.len();
        &self.samples[i * w..(i + 1) * w]
    }

    /// Final count of species `id`.
    pub fn final_count(&self, id: SpeciesId) -> u64 {
        self.final_state[id.0]
    }
}

/// Precomputed network layout for fast stepping.
struct Compiled {
    rate: Vec<f64>,
    reactants: Vec<Vec<(usize, u32)>>,
    delta: Vec<Vec<(usize, i64)>>,
    /// Reactions whose propensity may change when reaction `r` fires.
    affects: Vec<Vec<usize>>,
    /// Non-maintenance reactions whose liveness may change when `r` fires.
    affects_live: Vec<Vec<usize>>,
    maintenance: Vec<bool>,
    /// For indicator species: the species whose absence it signals.
    indicated_by: Vec<Option<usize>>,
    /// Whether a change of species `s` triggers a trajectory sample.
    sampled: Vec<bool>,
}

impl Compiled {
    fn new(crn: &Crn, rates: &RateConfig, observed: &[SpeciesId]) -> Self {
        let n_species = crn.species.len();
        let n = crn.reactions.len();
        let mut indicated_by = vec![None; n_species];
        let mut indicator_of = vec![None; n_species];
        for b in &crn.indicators {
            indicated_by[b.indicator.0] = Some(b.indicated.0);
            indicator_of[b.indicated.0] = Some(b.indicator.0);
        }
        let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); n_species];
        for (i, r) in crn.reactions.iter().enumerate() {
            for &(s, _) in &r.reactants {
                consumers[s.0].push(i);
            }
        }
        let mut rate = Vec::with_capacity(n);
        let mut reactants = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        let mut maintenance = Vec::with_capacity(n);
        for r in &crn.reactions {
            rate.push(rates.get(r.tier));
            reactants.push(r.reactants.iter().map(|&(s, k)| (s.0, k)).collect::<Vec<_>>());
            let mut d: Vec<(usize, i64)> = Vec::new();
            for &(s, _) in r.reactants.iter().chain(&r.products) {
                let c = r.net_change(s);
                if c != 0 && !d.iter().any(|&(t, _)| t == s.0) {
                    d.push((s.0, c));
                }
            }
            delta.push(d);
            maintenance.push(r.is_maintenance);
        }
        let mut affects = Vec::with_capacity(n);
        let mut affects_live = Vec::with_capacity(n);
        for d in &delta {
            let mut a: Vec<usize> = d.iter().flat_map(|&(s, _)| consumers[s].iter().copied()).collect();
            a.sort_unstable();
            a.dedup();
            let mut live: Vec<usize> = d
                .iter()
                .flat_map(|&(s, _)| {
                    let via_indicator = indicator_of[s].map(|ab| consumers[ab].as_slice()).unwrap_or(&[]);
                    consumers[s].iter().chain(via_indicator).copied()
                })
                .filter(|&r| !maintenance[r])
                .collect();
            live.sort_unstable();
            live.dedup();
            affects.push(a);
            affects_live.push(live);
        }
        let mut sampled = vec![false; n_species];
        for o in observed {
            sampled[o.0] = true;
        }
        Self {
            rate,
            reactants,
            delta,
            affects,
            affects_live,
            maintenance,
            indicated_by,
            sampled,
        }
    }

    fn propensity(&self, r: usize, state: &[u64]) -> f64 {
        let mut a = self.rate[r];
        for &(s, k) in &self.reactants[r] {
            let x = state[s];
            if x < u64::from(k) {
                return 0.0;
            }
            a *= if k == 1 { x as f64 } else { combinations(x, k) };
        }
        a
    }

    /// Enabled now, or enabled once absent species' indicators reappear.
    fn live(&self, r: usize, state: &[u64]) -> bool {
        self.reactants[r].iter().all(|&(s, k)| {
            let k = u64::from(k);
            let x = state[s];
            x >= k || matches!(self.indicated_by[s], Some(i) if state[i] == 0 && k <= 1)
        })
    }
}

struct Blocks {
    props: Vec<f64>,
    sums: Vec<f64>,
    dirty: Vec<bool>,
}

impl Blocks {
    fn new(props: Vec<f64>) -> Self {
        let n_blocks = props.len().div_ceil(BLOCK);
        let mut b = Self {
            props,
            sums: vec![0.0; n_blocks],
            dirty: vec![true; n_blocks],
        };
        b.refresh();
        b
    }

    fn set(&mut self, r: usize, p: f64) {
        if self.props[r] != p {
            self.props[r] = p;
            self.dirty[r / BLOCK] = true;
        }
    }

    fn refresh(&mut self) {
        for (i, d) in self.dirty.iter_mut().enumerate() {
            if *d {
                let end = ((i + 1) * BLOCK).min(self.props.len());
                self.sums[i] = self.props[i * BLOCK..end].iter().sum();
                *d = false;
            }
        }
    }

    fn total(&self) -> f64 {
        self.sums.iter().sum()
    }

    /// First reaction whose cumulative propensity exceeds `target`.
    fn select(&self, target: f64) -> Option<usize> {
        let mut acc = 0.0;
        let mut last_block = None;
        for (b, &s) in self.sums.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            last_block = Some(b);
            if acc + s > target {
                return self.select_in(b, target - acc);
            }
            acc += s;
        }
        // Rounding pushed the target past the end: take the last candidate.
        last_block.and_then(|b| self.select_in(b, f64::INFINITY))
    }

    fn select_in(&self, b: usize, target: f64) -> Option<usize> {
        let end = ((b + 1) * BLOCK).min(self.props.len());
        let mut inner = 0.0;
        let mut last = None;
        for r in b * BLOCK..end {
            let p = self.props[r];
            if p > 0.0 {
                if inner + p > target {
                    return Some(r);
                }
                inner += p;
                last = Some(r);
            }
        }
        last
    }
}

fn resolve_observed(crn: &Crn, observe: Option<&[String]>) -> Result<Vec<SpeciesId>, SimError> {
    match observe {
        None => Ok(crn.observables.clone()),
        Some(names) => names
            .iter()
            .map(|n| crn.species_id(n).ok_or_else(|| SimError::UnknownObservable(n.clone())))
            .collect(),
    }
}

fn check_config(config: &SimConfig) -> Result<(), SimError> {
    if config.horizon.is_nan() || config.horizon <= 0.0 {
        return Err(SimError::BadHorizon(config.horizon));
    }
    if config.max_steps == 0 {
        return Err(SimError::BadMaxSteps);
    }
    config.rates.check()?;
    Ok(())
}

#[derive(Clone, Copy)]
struct Record {
    samples: bool,
    firings: bool,
}

/// Runs one trajectory.
pub fn simulate(crn: &Crn, config: &SimConfig) -> Result<Trajectory, SimError> {
    run(crn, config, Record { samples: true, firings: false })
}

/// Like [`simulate`], also recording which reaction fired at each step and when.
pub fn simulate_with_firings(crn: &Crn, config: &SimConfig) -> Result<Trajectory, SimError> {
    run(crn, config, Record { samples: true, firings: true })
}

fn run(crn: &Crn, config: &SimConfig, record: Record) -> Result<Trajectory, SimError> {
    check_config(config)?;
    crn.validate_structure()
        .map_err(|e| SimError::InvalidNetwork(e[0].to_string()))?;
    let observed = resolve_observed(crn, config.observe.as_deref())?;
    let net = Compiled::new(crn, &config.rates, &observed);
    Ok(run_compiled(&net, crn.initial_state(), observed, config, record))
}

fn run_compiled(
    net: &Compiled,
    mut state: Vec<u64>,
    observed: Vec<SpeciesId>,
    config: &SimConfig,
    record: Record,
) -> Trajectory {
    let n = net.rate.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut blocks = Blocks::new((0..n).map(|r| net.propensity(r, &state)).collect());
    let mut live: Vec<bool> = (0..n).map(|r| !net.maintenance[r] && net.live(r, &state)).collect();
    let mut live_count = live.iter().filter(|&&l| l).count();

    let mut traj = Trajectory {
        observed,
        times: Vec::new(),
        samples: Vec::new(),
        final_time: 0.0,
        final_state: Vec::new(),
        steps: 0,
        stop: StopReason::Quiescent,
        firings: record.firings.then(Vec::new),
        firing_times: record.firings.then(Vec::new),
    };
    let push_sample = |traj: &mut Trajectory, t: f64, state: &[u64]| {
        if traj.times.last() == Some(&t) {
            let w = traj.observed.len();
            traj.samples.truncate(traj.samples.len() - w);
            traj.times.pop();
        }
        traj.times.push(t);
        for o in &traj.observed {
            traj.samples.push(state[o.0]);
        }
    };
    if record.samples {
        push_sample(&mut traj, 0.0, &state);
    }

    let mut t = 0.0_f64;
    let stop = loop {
        if live_count == 0 {
            break StopReason::Quiescent;
        }
        if traj.steps >= config.max_steps {
            break StopReason::MaxSteps;
        }
        let a0 = blocks.total();
        if a0 <= 0.0 {
            // Nothing can ever fire again.
            break StopReason::Quiescent;
        }
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let t_next = t + (-u1.ln() / a0);
        if t_next > config.horizon {
            t = config.horizon;
            break StopReason::Horizon;
        }
        let Some(r) = blocks.select(u2 * a0) else {
            break StopReason::Quiescent;
        };
        t = t_next;
        traj.steps += 1;

        let mut changed_observed = false;
        for &(s, d) in &net.delta[r] {
            let v = state[s] as i64 + d;
            debug_assert!(v >= 0, "negative count for species {s}");
            state[s] = v as u64;
            changed_observed |= net.sampled[s];
        }
        for &q in &net.affects[r] {
            blocks.set(q, net.propensity(q, &state));
        }
        blocks.refresh();
        for &q in &net.affects_live[r] {
            let l = net.live(q, &state);
            if l != live[q] {
                live[q] = l;
                if l {
                    live_count += 1;
                } else {
                    live_count -= 1;
                }
            }
        }
        if let (Some(f), Some(ft)) = (traj.firings.as_mut(), traj.firing_times.as_mut()) {
            f.push(r as u32);
            ft.push(t);
        }
        if record.samples && changed_observed {
            push_sample(&mut traj, t, &state);
        }
    };

    traj.final_time = t;
    traj.final_state = state;
    traj.stop = stop;
    traj
}

/// True iff no non-maintenance reaction can fire now or after absent
/// species' indicators reappear.
pub fn detect_quiescence(crn: &Crn, state: &[u64]) -> bool {
    let net = Compiled::new(crn, &RateConfig::default(), &[]);
    (0..crn.reactions.len()).all(|r| net.maintenance[r] || !net.live(r, state))
}

/// Aggregated final observables over independent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub observables: Vec<String>,
    /// Per observable: final count -> number of runs.
    pub histograms: Vec<BTreeMap<u64, usize>>,
    /// Most frequent final observable vector (ties go to the smallest).
    pub mode: Vec<u64>,
    pub mode_count: usize,
    pub quiescent_runs: usize,
    /// Final observable vector and stop reason of each run, by run index.
    pub finals: Vec<(Vec<u64>, StopReason)>,
}

impl EnsembleSummary {
    pub fn mode_fraction(&self) -> f64 {
        self.mode_count as f64 / self.runs as f64
    }

    /// Runs that reached quiescence with exactly `expected` observables.
    pub fn quiescent_matching(&self, expected: &[u64]) -> usize {
        self.finals
            .iter()
            .filter(|(v, s)| *s == StopReason::Quiescent && v == expected)
            .count()
    }

    /// `{name} -> {mode} ({pct}% of {runs} runs)`, one line per observable.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for (name, hist) in self.observables.iter().zip(&self.histograms) {
            let (value, count) = hist
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(v, c)| (*v, *c))
                .unwrap_or((0, 0));
            let pct = 100.0 * count as f64 / self.runs as f64;
            writeln!(out, "{name} -> {value} ({pct:.1}% of {} runs)", self.runs).unwrap();
        }
        out
    }
}

/// Runs `runs` trajectories with seeds `seed, seed + 1, ...`. Runs execute
/// in parallel; results are merged by run index.
pub fn run_ensemble(crn: &Crn, config: &SimConfig, runs: usize) -> Result<EnsembleSummary, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    check_config(config)?;
    crn.validate_structure()
        .map_err(|e| SimError::InvalidNetwork(e[0].to_string()))?;
    let observed = resolve_observed(crn, config.observe.as_deref())?;
    let net = Compiled::new(crn, &config.rates, &observed);
    let init = crn.initial_state();
    let record = Record { samples: false, firings: false };

    let finals: Vec<(Vec<u64>, StopReason)> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let cfg = SimConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let tr = run_compiled(&net, init.clone(), observed.clone(), &cfg, record);
            let v = observed.iter().map(|o| tr.final_state[o.0]).collect();
            (v, tr.stop)
        })
        .collect();

    let mut histograms = vec![BTreeMap::new(); observed.len()];
    let mut counts: BTreeMap<&[u64], usize> = BTreeMap::new();
    for (v, _) in &finals {
        for (h, x) in histograms.iter_mut().zip(v) {
            *h.entry(*x).or_insert(0) += 1;
        }
        *counts.entry(v.as_slice()).or_insert(0) += 1;
    }
    let (mode, mode_count) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(v, c)| (v.to_vec(), *c))
        .unwrap_or_default();
    let quiescent_runs = finals.iter().filter(|(_, s)| *s == StopReason::Quiescent).count();
    Ok(EnsembleSummary {
        runs,
        observables: observed.iter().map(|o| crn.name(*o).to_string()).collect(),
        histograms,
        mode,
        mode_count,
        quiescent_runs,
        finals,
    })
}

/// CSV trace: header `time,{name}...`, one row per sample, and a closing
/// row at the stop time if it is later than the last sample.
pub fn write_trace_csv(crn: &Crn, trajectory: &Trajectory, observe: &[String]) -> Result<String, SimError> {
    let mut cols = Vec::with_capacity(observe.len());
    for name in observe {
        let id = crn
            .species_id(name)
            .ok_or_else(|| SimError::UnknownObservable(name.clone()))?;
        let col = trajectory
            .observed
            .iter()
            .position(|&o| o == id)
            .ok_or_else(|| SimError::UnknownObservable(name.clone()))?;
        cols.push(col);
    }
    let mut out = String::from("time");
    for name in observe {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let row = |out: &mut String, t: f64, values: &[u64]| {
        write!(out, "{t}").unwrap();
        for &c in &cols {
            write!(out, ",{}", values[c]).unwrap();
        }
        out.push('\n');
    };
    if trajectory.is_empty() {
        let zeros = vec![0; trajectory.observed.len()];
        row(&mut out, 0.0, &zeros);
        return Ok(out);
    }
    for i in 0..trajectory.len() {
        row(&mut out, trajectory.times[i], trajectory.sample(i));
    }
    let last = *trajectory.times.last().unwrap();
    if trajectory.final_time > last {
        let values: Vec<u64> = trajectory.observed.iter().map(|o| trajectory.final_state[o.0]).collect();
        row(&mut out, trajectory.final_time, &values);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crn::{apply, RateTier, SpeciesKind};
    use crate::templates::{instantiate_clear, instantiate_copy};

    fn decay(n: u64) -> Crn {
        let mut crn = Crn::new();
        let a = crn.add_species("a", n, SpeciesKind::UserVariable).unwrap();
        crn.add_observable(a);
        crn.add_reaction(&[(a, 1)], &[], RateTier::Slow, false, "decay").unwrap();
        crn
    }

    fn x10() -> Crn {
        crate::compile_source("x = 10;", &RateConfig::default()).unwrap()
    }

    #[test]
    fn decay_mean_extinction_time() {
        let crn = decay(3);
        let runs = 4000;
        let mut total = 0.0;
        for seed in 0..runs {
            let t = simulate(&crn, &SimConfig { seed, ..SimConfig::default() }).unwrap();
            assert_eq!(t.stop, StopReason::Quiescent);
            assert_eq!(t.final_state, [0]);
            total += t.final_time;
        }
        let mean = total / runs as f64;
        let expected = 1.0 / 3.0 + 1.0 / 2.0 + 1.0;
        assert!((mean - expected).abs() / expected < 0.05, "mean {mean}");
    }

    #[test]
    fn empty_network_stops_at_zero() {
        let t = simulate(&Crn::new(), &SimConfig::default()).unwrap();
        assert_eq!(t.stop, StopReason::Quiescent);
        assert_eq!(t.final_time, 0.0);
        assert_eq!(t.steps, 0);
        assert_eq!(t.times, [0.0]);
    }

    #[test]
    fn copy_program_converges_and_is_deterministic() {
        let crn = x10();
        let cfg = SimConfig { seed: 11, ..SimConfig::default() };
        let a = simulate_with_firings(&crn, &cfg).unwrap();
        let b = simulate_with_firings(&crn, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stop, StopReason::Quiescent);
        assert_eq!(a.final_count(crn.species_id("x").unwrap()), 10);
        let c = simulate_with_firings(&crn, &SimConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.firings, c.firings);
    }

    #[test]
    fn rescaling_rates_halves_event_times() {
        let crn = x10();
        let base = SimConfig { seed: 5, ..SimConfig::default() };
        let fast = SimConfig {
            rates: base.rates.scaled(2.0),
            ..base.clone()
        };
        let a = simulate_with_firings(&crn, &base).unwrap();
        let b = simulate_with_firings(&crn, &fast).unwrap();
        assert_eq!(a.firings, b.firings);
        let (ta, tb) = (a.firing_times.unwrap(), b.firing_times.unwrap());
        assert!(!ta.is_empty());
        assert!(ta.iter().zip(&tb).all(|(x, y)| *x == 2.0 * *y));
        assert_eq!(a.final_state, b.final_state);
    }

    #[test]
    fn fired_reactions_were_enabled() {
        let crn = x10();
        let t = simulate_with_firings(&crn, &SimConfig { seed: 3, ..SimConfig::default() }).unwrap();
        let mut state = crn.initial_state();
        for &r in t.firings.as_ref().unwrap() {
            assert!(apply(&crn.reactions[r as usize], &mut state));
        }
        assert_eq!(state, t.final_state);
    }

    #[test]
    fn horizon_and_step_limits() {
        let crn = x10();
        let t = simulate(&crn, &SimConfig { horizon: 1.0, ..SimConfig::default() }).unwrap();
        assert_eq!(t.stop, StopReason::Horizon);
        assert_eq!(t.final_time, 1.0);
        let t = simulate(&crn, &SimConfig { max_steps: 10, ..SimConfig::default() }).unwrap();
        assert_eq!(t.stop, StopReason::MaxSteps);
        assert_eq!(t.steps, 10);
        assert!(simulate(&crn, &SimConfig { horizon: 0.0, ..SimConfig::default() }).is_err());
        assert!(simulate(&crn, &SimConfig { max_steps: 0, ..SimConfig::default() }).is_err());
    }

    #[test]
    fn unknown_observable() {
        let cfg = SimConfig {
            observe: Some(vec!["nosuch".into()]),
            ..SimConfig::default()
        };
        assert_eq!(
            simulate(&x10(), &cfg).unwrap_err(),
            SimError::UnknownObservable("nosuch".into())
        );
    }

    #[test]
    fn quiescence_of_clear_module() {
        let mut crn = Crn::new();
        let x = crn.add_species("x", 0, SpeciesKind::UserVariable).unwrap();
        let m = instantiate_clear(&mut crn, x, 1).unwrap();
        let mut state = crn.initial_state();
        state[m.done.unwrap().0] = 1;
        state[m.start.0] = 0;
        // Every template reaction has zero propensity here.
        let rates = RateConfig::default();
        for &r in &m.reactions {
            assert_eq!(crate::crn::propensity(&crn.reactions[r.0], &state, &rates), 0.0);
        }
        assert!(detect_quiescence(&crn, &state));

        state[m.start.0] = 1;
        state[m.done.unwrap().0] = 0;
        assert!(!detect_quiescence(&crn, &state), "pending detection of x = 0");
    }

    #[test]
    fn quiescence_mid_copy() {
        let mut crn = Crn::new();
        let x = crn.add_species("x", 0, SpeciesKind::UserVariable).unwrap();
        let y = crn.add_species("y", 0, SpeciesKind::UserVariable).unwrap();
        let m = instantiate_copy(&mut crn, x, y, 1).unwrap();
        let mut state = crn.initial_state();
        state[m.done.unwrap().0] = 1;
        state[m.local("var_prime").0] = 2;
        assert!(!detect_quiescence(&crn, &state));
        state[m.local("var_prime").0] = 0;
        assert!(detect_quiescence(&crn, &state));
    }

    #[test]
    fn only_maintenance_enabled_is_quiescent() {
        let mut crn = Crn::new();
        let x = crn.add_species("x", 3, SpeciesKind::UserVariable).unwrap();
        crate::templates::ensure_indicator(&mut crn, x).unwrap();
        let state = crn.initial_state();
        assert!(detect_quiescence(&crn, &state));
        let t = simulate(&crn, &SimConfig::default()).unwrap();
        assert_eq!(t.stop, StopReason::Quiescent);
        assert_eq!(t.steps, 0);
    }

    #[test]
    fn ensemble_summaries() {
        let lin = {
            let mut crn = Crn::new();
            let a = crn.add_species("a", 4, SpeciesKind::UserVariable).unwrap();
            let b = crn.add_species("b", 0, SpeciesKind::UserVariable).unwrap();
            crn.add_observable(b);
            crn.add_reaction(&[(a, 1)], &[(b, 1)], RateTier::Slow, false, "move").unwrap();
            crn
        };
        let s = run_ensemble(&lin, &SimConfig::default(), 20).unwrap();
        assert_eq!(s.mode, [4]);
        assert_eq!(s.mode_fraction(), 1.0);
        assert_eq!(s.quiescent_matching(&[4]), 20);
        assert_eq!(s.report(), "b -> 4 (100.0% of 20 runs)\n");

        let cfg = SimConfig { seed: 9, ..SimConfig::default() };
        let one = run_ensemble(&decay(2), &cfg, 1).unwrap();
        let single = simulate(&decay(2), &cfg).unwrap();
        assert_eq!(one.finals, vec![(vec![0], single.stop)]);
        assert!(run_ensemble(&lin, &cfg, 0).is_err());
    }

    #[test]
    fn ensemble_matches_individual_runs() {
        let crn = x10();
        let cfg = SimConfig { seed: 40, ..SimConfig::default() };
        let s = run_ensemble(&crn, &cfg, 4).unwrap();
        for (i, (v, stop)) in s.finals.iter().enumerate() {
            let t = simulate(&crn, &SimConfig { seed: 40 + i as u64, ..cfg.clone() }).unwrap();
            assert_eq!(*v, vec![t.final_count(crn.observables[0])]);
            assert_eq!(*stop, t.stop);
        }
    }

    #[test]
    fn trace_csv() {
        let crn = x10();
        let t = simulate(&crn, &SimConfig::default()).unwrap();
        let csv = write_trace_csv(&crn, &t, &["x".to_string()]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,x");
        assert_eq!(lines[1], "0,0");
        assert!(lines.last().unwrap().ends_with(",10"));
        let times: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*times.last().unwrap(), t.final_time);

        let cfg = SimConfig {
            observe: Some(vec!["x".into(), "c10".into()]),
            ..SimConfig::default()
        };
        let t2 = simulate(&crn, &cfg).unwrap();
        let csv2 = write_trace_csv(&crn, &t2, &["x".into(), "c10".into()]).unwrap();
        assert!(csv2.lines().all(|l| l.split(',').count() == 3));
        assert!(csv2.lines().nth(1).unwrap() == "0,0,10");

        assert!(write_trace_csv(&crn, &t, &["nosuch".into()]).is_err());

        let empty = Trajectory { times: vec![], samples: vec![], ..t };
        assert_eq!(write_trace_csv(&crn, &empty, &["x".into()]).unwrap(), "time,x\n0,0\n");
    }
}
