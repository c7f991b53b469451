use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jsr::{jsr_bounds_with_budget, JsrBounds, DEFAULT_NODE_BUDGET};
use crate::linalg::{is_power_convergent, power_limit, spectral_radius, Matrix, ToleranceConfig, Vector};
use crate::scalar::Scalar;

use super::transversality::{check_subsets, check_transversality, transversality_verdict, SubsetReport, TransversalityReport};
use super::{canonical_periodic, lyndon_status, semigroup_closure, simulate_path, MatrixFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    CertifiedYes,
    CertifiedNo,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransversalityDefect {
    /// `N ∩ R ≠ 0`.
    Intersection,
    /// `N + R ≠ R^n`.
    Sum,
}

/// Independently checkable evidence for a negative verdict.
#[derive(Clone, Debug)]
pub enum Witness<T> {
    Subset { subset: Vec<usize>, dim_n: usize, dim_r: usize, dim_intersection: usize, dim_sum: usize, defect: TransversalityDefect },
    /// Switching sequence `prefix · period^∞` whose products fail to converge.
    Word { prefix: Vec<usize>, period: Vec<usize> },
    /// Product in reading order with spectral radius above one.
    Product { word: Vec<usize>, matrix: Matrix<T>, spectral_radius: T },
}

impl<T> Witness<T> {
    pub fn subset(entry: &SubsetReport, defect: TransversalityDefect) -> Self {
        Witness::Subset {
            subset: entry.subset.clone(),
            dim_n: entry.dim_n,
            dim_r: entry.dim_r,
            dim_intersection: entry.dim_intersection,
            dim_sum: entry.dim_sum,
            defect,
        }
    }

    pub fn word(prefix: &[usize], period: &[usize]) -> Self {
        let (prefix, period) = canonical_periodic(prefix, period);
        Witness::Word { prefix, period }
    }
}

#[derive(Clone, Debug)]
pub struct Verdict<T> {
    pub status: Status,
    /// Name of the rule that decided the status.
    pub rule: String,
    pub witness: Option<Witness<T>>,
    pub supporting: Vec<Witness<T>>,
    pub evidence: BTreeMap<String, f64>,
}

impl<T: Scalar> Verdict<T> {
    pub fn yes(rule: &str) -> Self {
        Self::with(Status::CertifiedYes, rule, None)
    }

    pub fn no(rule: &str, witness: Witness<T>) -> Self {
        Self::with(Status::CertifiedNo, rule, Some(witness))
    }

    pub fn unknown(rule: &str) -> Self {
        Self::with(Status::Unknown, rule, None)
    }

    fn with(status: Status, rule: &str, witness: Option<Witness<T>>) -> Self {
        Self { status, rule: rule.to_string(), witness, supporting: Vec::new(), evidence: BTreeMap::new() }
    }

    pub fn record(&mut self, key: &str, value: T) {
        self.evidence.insert(key.to_string(), value.as_f64());
    }

    fn record_f64(&mut self, key: &str, value: f64) {
        self.evidence.insert(key.to_string(), value);
    }
}

/// Search limits for the certification rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    /// Maximum word length for product enumeration and JSR bounds.
    pub depth: usize,
    /// Random switching sequences sampled when no rule applies.
    pub trials: usize,
    pub trial_length: usize,
    pub max_closure: usize,
    pub seed: u64,
    pub node_budget: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { depth: 6, trials: 64, trial_length: 200, max_closure: 256, seed: 0, node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// Which side new factors are multiplied on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProductSide {
    /// `A_{j_m} ... A_{j_1}`.
    Left,
    /// `A_{j_1} ... A_{j_m}`.
    Right,
}

/// Fate of the left products along `prefix · period^∞`.
#[derive(Clone, Debug)]
pub enum PeriodicBehaviour<T> {
    Convergent { limit: Matrix<T> },
    /// The period product converges in powers but its phases have distinct limits.
    Oscillating { spread: T },
    NotPowerConvergent,
    /// An eigenvalue sits too close to the unit circle to classify.
    Indeterminate,
}

impl<T> PeriodicBehaviour<T> {
    pub fn diverges(&self) -> bool {
        matches!(self, Self::Oscillating { .. } | Self::NotPowerConvergent)
    }
}

/// Classifies the left products along `prefix · period^∞` exactly, up to the
/// eigenvalue band. With `Q_i` the left product of the first `i` period letters
/// and `G = lim P^k` for the full period product `P`, the products converge iff
/// every `Q_i G Q_prefix` agrees with `G Q_prefix`. A non-power-convergent `P`
/// is reported as such; it proves divergence when the prefix is empty.
pub fn periodic_left_behaviour<T: Scalar>(
    fam: &MatrixFamily<T>,
    prefix: &[usize],
    period: &[usize],
    tol: &ToleranceConfig<T>,
) -> Result<PeriodicBehaviour<T>> {
    fam.check_word(prefix)?;
    fam.check_word(period)?;
    if period.is_empty() {
        return Err(Error::Invalid("period must be nonempty".into()));
    }
    let p = fam.left_product(period);
    match is_power_convergent(&p, tol) {
        Err(Error::Indeterminate { .. }) | Err(Error::EigenNoConvergence { .. }) => return Ok(PeriodicBehaviour::Indeterminate),
        Err(e) => return Err(e),
        Ok(false) => return Ok(PeriodicBehaviour::NotPowerConvergent),
        Ok(true) => {}
    }
    let g = match power_limit(&p, tol) {
        Ok(g) => g,
        Err(Error::NotTransversal { .. }) => return Ok(PeriodicBehaviour::Indeterminate),
        Err(e) => return Err(e),
    };
    let start = fam.left_product(prefix);
    let limit = &g * &start;
    let threshold = tol.eig_tol * limit.operator_norm().max(T::one());
    let mut phase = Matrix::identity(fam.dim());
    let mut spread = T::zero();
    for &j in &period[..period.len() - 1] {
        phase = fam.matrix(j) * &phase;
        spread = spread.max((&(&phase * &limit) - &limit).operator_norm());
    }
    Ok(if spread > threshold { PeriodicBehaviour::Oscillating { spread } } else { PeriodicBehaviour::Convergent { limit } })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReplay {
    pub length: usize,
    /// Largest pairwise distance among the products in the final two periods.
    pub tail_spread: f64,
    pub threshold: f64,
    pub reproduced: bool,
}

/// Replays `prefix · period^∞` to length at least 200 and measures the spread of
/// the products over the final two periods.
pub fn replay_word_witness<T: Scalar>(
    fam: &MatrixFamily<T>,
    prefix: &[usize],
    period: &[usize],
    side: ProductSide,
    tol: &ToleranceConfig<T>,
) -> Result<WitnessReplay> {
    fam.check_word(prefix)?;
    fam.check_word(period)?;
    if period.is_empty() {
        return Err(Error::Invalid("period must be nonempty".into()));
    }
    let repeats = (200usize.saturating_sub(prefix.len())).div_ceil(period.len()).max(2);
    let word: Vec<usize> = prefix.iter().copied().chain(period.iter().copied().cycle().take(repeats * period.len())).collect();
    let window = 2 * period.len();
    let mut acc = Matrix::identity(fam.dim());
    let mut tail = Vec::with_capacity(window);
    for (i, &j) in word.iter().enumerate() {
        acc = match side {
            ProductSide::Left => fam.matrix(j) * &acc,
            ProductSide::Right => &acc * fam.matrix(j),
        };
        if i + window >= word.len() {
            tail.push(acc.clone());
        }
    }
    let mut spread = T::zero();
    for (a, x) in tail.iter().enumerate() {
        for y in &tail[a + 1..] {
            spread = spread.max((x - y).operator_norm());
        }
    }
    let threshold = tol.conv_tol * T::lit(10.0);
    Ok(WitnessReplay { length: word.len(), tail_spread: spread.as_f64(), threshold: threshold.as_f64(), reproduced: spread > threshold })
}

/// Lyndon words over `alphabet` (sorted) of length `1..=depth`, shortest first,
/// lexicographic within a length.
fn lyndon_words(alphabet: &[usize], depth: usize) -> Vec<Vec<usize>> {
    fn walk(alphabet: &[usize], depth: usize, word: &mut Vec<usize>, positions: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let (prenecklace, lyndon) = lyndon_status(positions);
        if !prenecklace {
            return;
        }
        if lyndon && !word.is_empty() {
            out.push(word.clone());
        }
        if word.len() == depth {
            return;
        }
        for (pos, &a) in alphabet.iter().enumerate() {
            word.push(a);
            positions.push(pos);
            walk(alphabet, depth, word, positions, out);
            word.pop();
            positions.pop();
        }
    }
    let mut out = Vec::new();
    walk(alphabet, depth, &mut Vec::new(), &mut Vec::new(), &mut out);
    out.sort_by_key(Vec::len);
    out
}

/// First primitive period over `alphabet` whose left products diverge.
fn find_divergent_period<T: Scalar>(fam: &MatrixFamily<T>, alphabet: &[usize], depth: usize, tol: &ToleranceConfig<T>) -> Option<Vec<usize>> {
    lyndon_words(alphabet, depth)
        .into_iter()
        .find(|w| periodic_left_behaviour(fam, &[], w, tol).map(|b| b.diverges()).unwrap_or(false))
}

fn all_orthogonal_projections<T: Scalar>(fam: &MatrixFamily<T>, tol: &ToleranceConfig<T>) -> bool {
    fam.matrices().iter().all(|a| a.is_symmetric(tol.conv_tol) && a.is_idempotent(tol.conv_tol))
}

/// Cycle through at least two closure elements in the left-multiplication graph,
/// as `(prefix, period)` switching sequences. `Ok(None)` means the graph is acyclic
/// apart from self-loops; `Err(())` means the closure is not closed numerically.
fn closure_cycle<T: Scalar>(fam: &MatrixFamily<T>, max_size: usize, tol: &ToleranceConfig<T>) -> Option<std::result::Result<Option<(Vec<usize>, Vec<usize>)>, ()>> {
    let closure = semigroup_closure(fam, max_size, tol);
    if !closure.closed {
        return None;
    }
    let nodes = closure.elements.len();
    let mut edges = vec![Vec::with_capacity(fam.len()); nodes];
    for (v, e) in closure.elements.iter().enumerate() {
        for (j, a) in fam.matrices().iter().enumerate() {
            match closure.find(&(a * &e.matrix)) {
                Some(u) => edges[v].push((j, u)),
                None => return Some(Err(())),
            }
        }
    }
    let mut reachable = vec![false; nodes];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for a in fam.matrices() {
        match closure.find(a) {
            Some(u) if !reachable[u] => {
                reachable[u] = true;
                queue.push_back(u);
            }
            Some(_) => {}
            None => return Some(Err(())),
        }
    }
    while let Some(v) = queue.pop_front() {
        for &(_, u) in &edges[v] {
            if !reachable[u] {
                reachable[u] = true;
                queue.push_back(u);
            }
        }
    }
    // Shortest labelled path from `from` to `to`.
    let path = |from: usize, to: usize| -> Option<Vec<usize>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut labels = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (prev, j) = parent[cur].expect("visited");
                    labels.push(j);
                    cur = prev;
                }
                labels.reverse();
                return Some(labels);
            }
            for &(j, u) in &edges[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some((v, j));
                    queue.push_back(u);
                }
            }
        }
        None
    };
    for v in (0..nodes).filter(|&v| reachable[v]) {
        for &(j, u) in &edges[v] {
            if u == v {
                continue;
            }
            if let Some(back) = path(u, v) {
                let prefix: Vec<usize> = closure.elements[v].word.iter().rev().copied().collect();
                let mut period = vec![j];
                period.extend(back);
                return Some(Ok(Some((prefix, period))));
            }
        }
    }
    Some(Ok(None))
}

/// Tail oscillation of random left products and path variation from basis vectors.
fn random_evidence<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget) -> (T, T) {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut oscillation = T::zero();
    let mut variation = T::zero();
    for t in 0..budget.trials {
        let word: Vec<usize> = (0..budget.trial_length).map(|_| rng.random_range(0..fam.len())).collect();
        let mut acc = Matrix::identity(fam.dim());
        let mut steps = Vec::with_capacity(word.len());
        for &j in &word {
            let next = fam.matrix(j) * &acc;
            steps.push((&next - &acc).operator_norm());
            acc = next;
        }
        let tail = steps.len().saturating_sub(10);
        oscillation = steps[tail..].iter().fold(oscillation, |m, &s| m.max(s));
        let start = Vector::basis(fam.dim(), t % fam.dim());
        if let Ok(trace) = simulate_path(fam, &word, &start) {
            variation = variation.max(trace.total_variation);
        }
    }
    (oscillation, variation)
}

fn record_bounds<T: Scalar>(verdict: &mut Verdict<T>, bounds: &JsrBounds<T>) {
    verdict.record("jsr_lower", bounds.lower);
    verdict.record("jsr_upper", bounds.upper);
    if bounds.budget_exhausted {
        verdict.record_f64("jsr_budget_exhausted", 1.0);
    }
}

/// Shared rule chain deciding convergence of left products of `fam`.
fn left_convergence<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget, tol: &ToleranceConfig<T>, sum_rule: &str) -> Verdict<T> {
    if all_orthogonal_projections(fam, tol) {
        return Verdict::yes("orthogonal_projections");
    }

    let bounds = jsr_bounds_with_budget(fam, budget.depth, budget.node_budget);
    if bounds.upper < T::one() {
        let mut v = Verdict::yes("jsr_upper_below_one");
        record_bounds(&mut v, &bounds);
        return v;
    }

    if let Ok(report) = check_transversality(fam, tol) {
        if let Some(entry) = report.full_failure() {
            let subset_witness = Witness::subset(entry, TransversalityDefect::Sum);
            let mut v = match find_divergent_period(fam, &entry.subset, budget.depth, tol) {
                Some(period) => {
                    let mut v = Verdict::no(sum_rule, Witness::word(&[], &period));
                    v.supporting.push(subset_witness);
                    v
                }
                None => Verdict::no(sum_rule, subset_witness),
            };
            record_bounds(&mut v, &bounds);
            return v;
        }
    }

    let alphabet: Vec<usize> = (0..fam.len()).collect();
    for word in lyndon_words(&alphabet, budget.depth) {
        if let Ok(false) = is_power_convergent(&fam.left_product(&word), tol) {
            let mut v = Verdict::no("product_not_power_convergent", Witness::word(&[], &word));
            record_bounds(&mut v, &bounds);
            return v;
        }
    }

    if bounds.lower > T::one() + tol.eig_tol {
        let matrix = fam.product(&bounds.witness_word);
        let rho = spectral_radius(&matrix).unwrap_or(bounds.lower);
        let mut v = Verdict::no("jsr_lower_above_one", Witness::Product { word: bounds.witness_word.clone(), matrix, spectral_radius: rho });
        record_bounds(&mut v, &bounds);
        return v;
    }

    if let Some(Ok(cycle)) = closure_cycle(fam, budget.max_closure, tol) {
        let mut v = match cycle {
            None => Verdict::yes("closure_graph_acyclic"),
            Some((prefix, period)) => Verdict::no("closure_graph_cycle", Witness::word(&prefix, &period)),
        };
        record_bounds(&mut v, &bounds);
        return v;
    }

    let (oscillation, variation) = random_evidence(fam, budget);
    let mut v = Verdict::unknown("inconclusive");
    record_bounds(&mut v, &bounds);
    v.record("max_tail_oscillation", oscillation);
    v.record("max_path_variation", variation);
    v.record_f64("closure_size_bound", budget.max_closure as f64);
    v
}

/// Left convergent products: every `A_{j_m} ... A_{j_1}` converges.
pub fn lcp_verdict<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget, tol: &ToleranceConfig<T>) -> Verdict<T> {
    left_convergence(fam, budget, tol, "full_transversality_fails")
}

/// Right convergent products, decided as left convergence of the transposed family.
/// Word witnesses carry over unchanged (they now describe right products); subset
/// and product witnesses are restated for the original family.
pub fn rcp_verdict<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget, tol: &ToleranceConfig<T>) -> Verdict<T> {
    let mut v = left_convergence(&fam.transpose(), budget, tol, "zero_transversality_fails");
    let restate = |w: Witness<T>| match w {
        Witness::Subset { subset, .. } => {
            let report = check_subsets(fam, std::iter::once(subset.clone()), tol).expect("subset came from this family");
            Witness::subset(&report.subsets[0], TransversalityDefect::Intersection)
        }
        Witness::Product { word, .. } => {
            let word: Vec<usize> = word.into_iter().rev().collect();
            let matrix = fam.product(&word);
            let spectral_radius = spectral_radius(&matrix).unwrap_or(T::nan());
            Witness::Product { word, matrix, spectral_radius }
        }
        w @ Witness::Word { .. } => w,
    };
    v.witness = v.witness.take().map(restate);
    v.supporting = std::mem::take(&mut v.supporting).into_iter().map(restate).collect();
    v
}

#[derive(Clone, Debug)]
pub struct CpReport<T> {
    pub cp: Verdict<T>,
    pub lcp: Verdict<T>,
    pub rcp: Verdict<T>,
    pub transversality: Verdict<T>,
    pub transversality_report: Option<TransversalityReport>,
}

fn subset_no<T: Scalar>(sub: &mut Verdict<T>, rule: &str, entry: &SubsetReport, defect: TransversalityDefect) {
    if sub.status != Status::CertifiedNo {
        if sub.status == Status::CertifiedYes {
            sub.record_f64("overridden_yes", 1.0);
        }
        sub.status = Status::CertifiedNo;
        sub.rule = rule.to_string();
        sub.witness = Some(Witness::subset(entry, defect));
    }
}

fn upgrade<T: Scalar>(sub: &mut Verdict<T>) {
    if sub.status == Status::Unknown {
        sub.status = Status::CertifiedYes;
        sub.rule = "two_of_three".to_string();
    }
}

fn demote<T: Scalar>(sub: &mut Verdict<T>) {
    if sub.status == Status::CertifiedYes {
        sub.status = Status::Unknown;
        sub.record_f64("demoted_by_conflict", 1.0);
    }
}

/// Combines exact transversality with the LCP and RCP verdicts: two of the three
/// properties imply the third, `R^n`-transversality is necessary for LCP and
/// `0`-transversality for RCP. The result never holds two `CertifiedYes` next to a
/// `CertifiedNo`.
pub fn cp_verdict<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget, tol: &ToleranceConfig<T>) -> Result<CpReport<T>> {
    let (mut tr, report) = transversality_verdict(fam, tol)?;
    let mut lcp = lcp_verdict(fam, budget, tol);
    let mut rcp = rcp_verdict(fam, budget, tol);

    if let Some(report) = &report {
        if let Some(entry) = report.full_failure() {
            subset_no(&mut lcp, "full_transversality_fails", entry, TransversalityDefect::Sum);
        }
        if let Some(entry) = report.zero_failure() {
            subset_no(&mut rcp, "zero_transversality_fails", entry, TransversalityDefect::Intersection);
        }
    }

    let yes = |v: &Verdict<T>| v.status == Status::CertifiedYes;
    let no = |v: &Verdict<T>| v.status == Status::CertifiedNo;
    match (yes(&tr), yes(&lcp), yes(&rcp)) {
        (true, true, _) => upgrade(&mut rcp),
        (true, _, true) => upgrade(&mut lcp),
        (_, true, true) => upgrade(&mut tr),
        _ => {}
    }
    // A witnessed No against two Yes verdicts: the statistical Yes verdicts yield.
    if no(&tr) && yes(&lcp) && yes(&rcp) {
        demote(&mut lcp);
        demote(&mut rcp);
    }
    if no(&lcp) && yes(&tr) && yes(&rcp) {
        demote(&mut rcp);
    }
    if no(&rcp) && yes(&tr) && yes(&lcp) {
        demote(&mut lcp);
    }

    let subs = [&tr, &lcp, &rcp];
    let cp = if let Some(failed) = subs.iter().find(|v| no(v)) {
        let mut v = Verdict::no(&format!("{}:{}", component_name(failed, &tr, &lcp), failed.rule), failed.witness.clone().expect("CertifiedNo carries a witness"));
        v.supporting = failed.supporting.clone();
        v
    } else if subs.iter().all(|v| yes(v)) {
        Verdict::yes("all_components")
    } else {
        Verdict::unknown("component_unknown")
    };
    Ok(CpReport { cp, lcp, rcp, transversality: tr, transversality_report: report })
}

fn component_name<T>(failed: &Verdict<T>, tr: &Verdict<T>, lcp: &Verdict<T>) -> &'static str {
    if std::ptr::eq(failed, tr) {
        "transversality"
    } else if std::ptr::eq(failed, lcp) {
        "lcp"
    } else {
        "rcp"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoOneReport {
    /// False when the CP verdict is already negative.
    pub precondition_met: bool,
    /// False when the JSR bounds exclude 1.
    pub applicable: bool,
    pub jsr_lower: f64,
    pub jsr_upper: f64,
    pub spectral_radii: Vec<f64>,
    pub near_one: Vec<usize>,
    pub not_power_convergent: Vec<usize>,
    pub findings: Vec<String>,
    pub passed: bool,
}

/// For a family that is not known to fail CP and whose JSR may equal 1, checks
/// that some member has spectral radius 1 and every member is power-convergent.
pub fn rho_one_structure_check<T: Scalar>(fam: &MatrixFamily<T>, budget: &Budget, tol: &ToleranceConfig<T>) -> Result<RhoOneReport> {
    let cp = cp_verdict(fam, budget, tol)?;
    let bounds = jsr_bounds_with_budget(fam, budget.depth, budget.node_budget);
    let radii: Vec<T> = fam.matrices().iter().map(spectral_radius).collect::<Result<_>>()?;
    let mut report = RhoOneReport {
        precondition_met: cp.cp.status != Status::CertifiedNo,
        applicable: bounds.lower <= T::one() + tol.eig_tol && bounds.upper >= T::one() - tol.eig_tol,
        jsr_lower: bounds.lower.as_f64(),
        jsr_upper: bounds.upper.as_f64(),
        spectral_radii: radii.iter().map(|r| r.as_f64()).collect(),
        near_one: Vec::new(),
        not_power_convergent: Vec::new(),
        findings: Vec::new(),
        passed: true,
    };
    if !report.applicable {
        report.findings.push("not applicable: JSR bounds exclude 1".into());
        return Ok(report);
    }
    report.near_one = (0..fam.len()).filter(|&j| (radii[j] - T::one()).abs() <= tol.eig_tol).collect();
    for (j, a) in fam.matrices().iter().enumerate() {
        match is_power_convergent(a, tol) {
            Ok(true) => {}
            Ok(false) => report.not_power_convergent.push(j),
            Err(_) => report.findings.push(format!("matrix {} has an unclassifiable unit-circle eigenvalue", fam.label(j))),
        }
    }
    if report.near_one.is_empty() {
        report.findings.push("no member has spectral radius 1".into());
    }
    for &j in &report.not_power_convergent {
        report.findings.push(format!("matrix {} is not power-convergent", fam.label(j)));
    }
    report.passed = report.findings.is_empty();
    if !report.precondition_met {
        report.findings.push("precondition: CP verdict is CertifiedNo".into());
    }
    Ok(report)
}
