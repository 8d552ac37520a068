//! Exhaustive desk-scale scan of `x < y < z <= bound` for exact solutions of
//! `x^p + y^p = z^p` and for the near misses with the smallest `|gap|`.
//!
//! The z-range is cut into fixed blocks, independent of the worker count, so
//! any number of workers produces the same report. Each block keeps a bounded
//! top-k buffer; buffers are merged under the total order
//! `(abs_gap, z, y, x)`.

use std::collections::BinaryHeap;
use std::io::Write;

use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, pow, Integer, OddPrime};
use crate::{Error, Result};

/// Default ceiling on the number of triples a single scan may visit.
pub const DEFAULT_MAX_TRIPLES: u128 = 4_000_000_000;

const BLOCK: u64 = 8;
const PREFILTER_CAP: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchWindow {
    pub p: OddPrime,
    pub bound: u64,
    pub coprime_only: bool,
    pub top_k: usize,
}

impl SearchWindow {
    pub fn new(p: OddPrime, bound: u64, coprime_only: bool, top_k: usize) -> Result<Self> {
        if bound < 3 {
            return Err(Error::Precondition(format!("bound must be >= 3, got {bound}")));
        }
        if top_k == 0 {
            return Err(Error::Precondition("top_k must be >= 1".into()));
        }
        Ok(SearchWindow { p, bound, coprime_only, top_k })
    }

    /// Number of triples `x < y < z <= bound`.
    pub fn triple_count(&self) -> u128 {
        let n = u128::from(self.bound);
        n * (n - 1) * (n - 2) / 6
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub workers: usize,
    pub prefilter: bool,
    pub max_triples: u128,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            prefilter: true,
            max_triples: DEFAULT_MAX_TRIPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triple {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NearMiss {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    /// `x^p + y^p - z^p`, never zero.
    #[serde(serialize_with = "crate::serde_big::int")]
    pub gap: Integer,
    #[serde(serialize_with = "crate::serde_big::int")]
    pub abs_gap: Integer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrefilterStats {
    pub enabled: bool,
    /// Product of the filter primes.
    pub modulus: u64,
    pub primes: Vec<u64>,
    /// Candidates that reached the exact equality test.
    pub exact_tests: u64,
    /// Candidates rejected by residues alone.
    pub skipped: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub p: u32,
    pub bound: u64,
    pub coprime_only: bool,
    pub top_k: usize,
    /// Triples visited, `C(bound, 3)`.
    pub scanned: u64,
    /// Triples passing the coprimality filter (all of them when off).
    pub candidates: u64,
    pub prefilter: PrefilterStats,
    pub exact_solutions: Vec<Triple>,
    pub near_misses: Vec<NearMiss>,
}

impl SearchReport {
    /// CSV with columns `x,y,z,gap`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "z", "gap"])?;
        for m in &self.near_misses {
            w.write_record([m.x.to_string(), m.y.to_string(), m.z.to_string(), m.gap.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Primes `q = 1 (mod p)` in increasing order while their product stays
/// below 2^32, with the table of `n^p mod q`.
#[derive(Clone, Debug)]
pub struct ResidueFilter {
    primes: Vec<u64>,
    modulus: u64,
    tables: Vec<Vec<u32>>,
}

impl ResidueFilter {
    pub fn new(p: OddPrime) -> Self {
        let p = u64::from(p.get());
        let mut primes = Vec::new();
        let mut modulus = 1u64;
        let mut q = 2 * p + 1;
        while modulus.saturating_mul(q) < PREFILTER_CAP {
            if is_prime(q) {
                primes.push(q);
                modulus *= q;
            }
            q += 2 * p;
        }
        let tables = primes
            .iter()
            .map(|&q| (0..q).map(|n| mod_pow(n, p, q) as u32).collect())
            .collect();
        ResidueFilter { primes, modulus, tables }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Whether `x^p + y^p = z^p` survives every residue check. A `false`
    /// answer proves the equation fails.
    pub fn admits(&self, x: u64, y: u64, z: u64) -> bool {
        self.primes.iter().zip(&self.tables).all(|(&q, t)| {
            let lhs = u64::from(t[(x % q) as usize]) + u64::from(t[(y % q) as usize]);
            lhs % q == u64::from(t[(z % q) as usize])
        })
    }
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((u128::from(r) * u128::from(b)) % u128::from(m)) as u64;
        }
        b = ((u128::from(b) * u128::from(b)) % u128::from(m)) as u64;
        e >>= 1;
    }
    r
}

/// Ordering key `(abs_gap, z, y, x)` with the signed gap; smaller is better.
type Entry<T> = ((T, u64, u64, u64), T);

struct BlockResult<T> {
    scanned: u64,
    candidates: u64,
    exact_tests: u64,
    skipped: u64,
    solutions: Vec<Triple>,
    best: BinaryHeap<Entry<T>>,
}

fn push_bounded<T: Ord>(heap: &mut BinaryHeap<Entry<T>>, k: usize, entry: Entry<T>) {
    if heap.len() < k {
        heap.push(entry);
    } else if heap.peek().is_some_and(|worst| entry.0 < worst.0) {
        heap.pop();
        heap.push(entry);
    }
}

/// Powers `n^p` for `0 <= n <= bound`, as `i128` when they fit.
enum Powers {
    Small(Vec<i128>),
    Big(Vec<Integer>),
}

impl Powers {
    fn new(p: u32, bound: u64) -> Self {
        let top = pow(&Integer::from(bound), p);
        // Sums of two powers must also fit.
        if top.bits() < 126 {
            Powers::Small((0..=bound).map(|n| (n as i128).pow(p)).collect())
        } else {
            Powers::Big((0..=bound).map(|n| pow(&Integer::from(n), p)).collect())
        }
    }
}

fn scan_block<T>(
    powers: &[T],
    zs: std::ops::RangeInclusive<u64>,
    w: &SearchWindow,
    filter: Option<&ResidueFilter>,
) -> BlockResult<Integer>
where
    T: Clone + Signed + Ord + Into<Integer>,
{
    let mut out = BlockResult {
        scanned: 0,
        candidates: 0,
        exact_tests: 0,
        skipped: 0,
        solutions: Vec::new(),
        best: BinaryHeap::<Entry<T>>::new(),
    };
    for z in zs {
        let pz = &powers[z as usize];
        for y in 2..z {
            let yz = y.gcd(&z);
            let py = &powers[y as usize];
            for x in 1..y {
                out.scanned += 1;
                if w.coprime_only && x.gcd(&yz) != 1 {
                    continue;
                }
                out.candidates += 1;
                let gap = powers[x as usize].clone() + py.clone() - pz.clone();
                if filter.is_none_or(|f| f.admits(x, y, z)) {
                    out.exact_tests += 1;
                    if gap.is_zero() {
                        out.solutions.push(Triple { x, y, z });
                        continue;
                    }
                } else {
                    out.skipped += 1;
                }
                push_bounded(&mut out.best, w.top_k, ((gap.abs(), z, y, x), gap));
            }
        }
    }
    BlockResult {
        scanned: out.scanned,
        candidates: out.candidates,
        exact_tests: out.exact_tests,
        skipped: out.skipped,
        solutions: out.solutions,
        best: out
            .best
            .into_iter()
            .map(|((a, z, y, x), g)| ((a.into(), z, y, x), g.into()))
            .collect(),
    }
}

pub fn near_miss_scan(w: &SearchWindow) -> Result<SearchReport> {
    near_miss_scan_with(w, &ScanOptions::default())
}

pub fn near_miss_scan_with(w: &SearchWindow, opts: &ScanOptions) -> Result<SearchReport> {
    let count = w.triple_count();
    if count > opts.max_triples {
        return Err(Error::BudgetExceeded { count, budget: opts.max_triples });
    }
    let filter = opts.prefilter.then(|| ResidueFilter::new(w.p));
    let powers = Powers::new(w.p.get(), w.bound);
    let blocks: Vec<_> = (3..=w.bound)
        .step_by(BLOCK as usize)
        .map(|lo| lo..=(lo + BLOCK - 1).min(w.bound))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Integrity(format!("thread pool: {e}")))?;
    let results: Vec<BlockResult<Integer>> = pool.install(|| {
        blocks
            .into_par_iter()
            .map(|zs| {
                log::debug!("scanning z in {zs:?}");
                match &powers {
                    Powers::Small(t) => scan_block(t, zs, w, filter.as_ref()),
                    Powers::Big(t) => scan_block(t, zs, w, filter.as_ref()),
                }
            })
            .collect()
    });

    let mut merged = BlockResult::<Integer> {
        scanned: 0,
        candidates: 0,
        exact_tests: 0,
        skipped: 0,
        solutions: Vec::new(),
        best: BinaryHeap::new(),
    };
    for r in results {
        merged.scanned += r.scanned;
        merged.candidates += r.candidates;
        merged.exact_tests += r.exact_tests;
        merged.skipped += r.skipped;
        merged.solutions.extend(r.solutions);
        for entry in r.best {
            push_bounded(&mut merged.best, w.top_k, entry);
        }
    }
    merged.solutions.sort();
    let near_misses = merged
        .best
        .into_sorted_vec()
        .into_iter()
        .map(|((abs_gap, z, y, x), gap)| NearMiss { x, y, z, gap, abs_gap })
        .collect();
    let (primes, modulus) = filter
        .as_ref()
        .map_or((Vec::new(), 1), |f| (f.primes().to_vec(), f.modulus()));
    Ok(SearchReport {
        p: w.p.get(),
        bound: w.bound,
        coprime_only: w.coprime_only,
        top_k: w.top_k,
        scanned: merged.scanned,
        candidates: merged.candidates,
        prefilter: PrefilterStats {
            enabled: filter.is_some(),
            modulus,
            primes,
            exact_tests: merged.exact_tests,
            skipped: merged.skipped,
        },
        exact_solutions: merged.solutions,
        near_misses,
    })
}

/// Congruence tallies over a window.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CongruenceTally {
    pub p: u32,
    pub triples: u64,
    /// `(x+y-z)^p = x+y-z (mod p)`; a law, so always equal to `triples`.
    pub fermat_little: u64,
    /// `(x+y-z)^p = x^p + y^p - z^p (mod p)`; also a law.
    pub gap_congruence: u64,
    /// `z - y = x (mod p)`; a statistic.
    pub z_minus_y_equiv_x: u64,
}

impl CongruenceTally {
    pub fn fermat_little_rate(&self) -> f64 {
        if self.triples == 0 {
            return 1.0;
        }
        self.fermat_little as f64 / self.triples as f64
    }
}

/// `(fermat_little, gap_congruence, z - y = x)` for one triple.
pub fn congruence_flags(p: u32, x: u64, y: u64, z: u64) -> (bool, bool, bool) {
    let m = u64::from(p);
    let n = (x % m + y % m + m - z % m) % m;
    let fl = mod_pow(n, m, m) == n;
    let rhs = (mod_pow(x, m, m) + mod_pow(y, m, m) + m - mod_pow(z, m, m)) % m;
    let gc = mod_pow(n, m, m) == rhs;
    let zy = (z % m + m - y % m) % m == x % m;
    (fl, gc, zy)
}

pub fn congruence_stats(w: &SearchWindow) -> Result<CongruenceTally> {
    let count = w.triple_count();
    if count > DEFAULT_MAX_TRIPLES {
        return Err(Error::BudgetExceeded { count, budget: DEFAULT_MAX_TRIPLES });
    }
    let p = w.p.get();
    let per_z: Vec<CongruenceTally> = (3..=w.bound)
        .into_par_iter()
        .map(|z| {
            let mut t = CongruenceTally { p, ..Default::default() };
            for y in 2..z {
                let yz = y.gcd(&z);
                for x in 1..y {
                    if w.coprime_only && x.gcd(&yz) != 1 {
                        continue;
                    }
                    let (fl, gc, zy) = congruence_flags(p, x, y, z);
                    t.triples += 1;
                    t.fermat_little += u64::from(fl);
                    t.gap_congruence += u64::from(gc);
                    t.z_minus_y_equiv_x += u64::from(zy);
                }
            }
            t
        })
        .collect();
    Ok(per_z.into_iter().fold(CongruenceTally { p, ..Default::default() }, |mut acc, t| {
        acc.triples += t.triples;
        acc.fermat_little += t.fermat_little;
        acc.gap_congruence += t.gap_congruence;
        acc.z_minus_y_equiv_x += t.z_minus_y_equiv_x;
        acc
    }))
}

/// Number of triples `x < y < z <= n` with `gcd(x, y, z) = 1`, by Möbius
/// inversion over the common divisor.
pub fn coprime_triple_count(n: u64) -> u128 {
    let mut mu = vec![1i64; n as usize + 1];
    let mut is_comp = vec![false; n as usize + 1];
    for i in 2..=n as usize {
        if !is_comp[i] {
            for j in (i..=n as usize).step_by(i) {
                if j > i {
                    is_comp[j] = true;
                }
                mu[j] = -mu[j];
            }
            let sq = i * i;
            for j in (sq..=n as usize).step_by(sq) {
                mu[j] = 0;
            }
        }
    }
    let c3 = |m: u64| {
        let m = i128::from(m);
        m * (m - 1) * (m - 2) / 6
    };
    let total: i128 = (1..=n).map(|d| i128::from(mu[d as usize]) * c3(n / d)).sum();
    total.to_u128().expect("count is non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    fn opts(workers: usize, prefilter: bool) -> ScanOptions {
        ScanOptions { workers, prefilter, max_triples: DEFAULT_MAX_TRIPLES }
    }

    #[test]
    fn window_validation() {
        assert!(SearchWindow::new(p(3), 2, true, 5).is_err());
        assert!(SearchWindow::new(p(3), 9, true, 0).is_err());
    }

    #[test]
    fn small_windows() {
        let w = SearchWindow::new(p(3), 9, true, 3).unwrap();
        let r = near_miss_scan(&w).unwrap();
        assert!(r.exact_solutions.is_empty());
        let best = &r.near_misses[0];
        assert_eq!((best.x, best.y, best.z), (6, 8, 9));
        assert_eq!(best.gap, Integer::from(-1));

        let w = SearchWindow::new(p(5), 4, true, 10).unwrap();
        let r = near_miss_scan(&w).unwrap();
        assert_eq!(r.candidates, 4);
        assert_eq!(r.near_misses.len(), 4);
        let best = &r.near_misses[0];
        assert_eq!((best.x, best.y, best.z), (1, 2, 3));
        assert_eq!(best.abs_gap, Integer::from(210));
    }

    #[test]
    fn refuses_oversized_window() {
        let w = SearchWindow::new(p(3), 1000, false, 1).unwrap();
        let o = ScanOptions { max_triples: 1000, ..opts(1, true) };
        match near_miss_scan_with(&w, &o) {
            Err(Error::BudgetExceeded { count, .. }) => assert_eq!(count, 166_167_000),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn residue_filter_never_rejects_a_true_equation() {
        // 0^p + n^p = n^p is a true equation.
        let f = ResidueFilter::new(p(3));
        assert_eq!(f.primes(), &[7, 13, 19, 31, 37, 43]);
        assert!(f.modulus() < PREFILTER_CAP);
        for q in f.primes() {
            assert_eq!(q % 3, 1);
        }
        for n in 1..200 {
            assert!(f.admits(0, n, n));
        }
    }

    #[test]
    fn filter_soundness_and_worker_determinism() {
        let w = SearchWindow::new(p(3), 60, false, 15).unwrap();
        let plain = near_miss_scan_with(&w, &opts(1, false)).unwrap();
        let filtered = near_miss_scan_with(&w, &opts(1, true)).unwrap();
        assert_eq!(plain.exact_solutions, filtered.exact_solutions);
        assert_eq!(plain.near_misses, filtered.near_misses);
        assert!(filtered.prefilter.skipped > 0);
        let many = near_miss_scan_with(&w, &opts(7, true)).unwrap();
        assert_eq!(
            serde_json::to_string(&filtered).unwrap(),
            serde_json::to_string(&many).unwrap()
        );
    }

    #[test]
    fn completeness_counts() {
        for bound in [3u64, 10, 37, 64] {
            let w = SearchWindow::new(p(5), bound, true, 1).unwrap();
            let r = near_miss_scan(&w).unwrap();
            assert_eq!(u128::from(r.scanned), w.triple_count());
            assert_eq!(u128::from(r.candidates), coprime_triple_count(bound));
        }
    }

    #[test]
    fn big_integer_path_matches() {
        // 200^17 needs more than 126 bits.
        let w = SearchWindow::new(p(17), 40, true, 5).unwrap();
        assert!(matches!(Powers::new(17, 200), Powers::Big(_)));
        let r = near_miss_scan(&w).unwrap();
        let best = &r.near_misses[0];
        let direct = pow(&Integer::from(best.x), 17) + pow(&Integer::from(best.y), 17)
            - pow(&Integer::from(best.z), 17);
        assert_eq!(best.gap, direct);
    }

    #[test]
    fn congruence_examples() {
        let w = SearchWindow::new(p(3), 9, true, 1).unwrap();
        let t = congruence_stats(&w).unwrap();
        assert_eq!(t.fermat_little, t.triples);
        assert_eq!(t.gap_congruence, t.triples);
        assert!(t.z_minus_y_equiv_x < t.triples);
        assert_eq!(t.fermat_little_rate(), 1.0);
        let (_, _, zy) = congruence_flags(3, 6, 8, 9);
        assert!(!zy);
    }

    #[test]
    fn csv_output() {
        let w = SearchWindow::new(p(3), 9, true, 1).unwrap();
        let mut buf = Vec::new();
        near_miss_scan(&w).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,z,gap\n6,8,9,-1\n");
    }

    #[test]
    fn congruence_flags_unordered() {
        // y > z must not underflow.
        assert_eq!(congruence_flags(3, 1, 5, 2), (true, true, false));
        assert_eq!(congruence_flags(5, u64::MAX, u64::MAX, 1), congruence_flags(5, 0, 0, 1));
    }
}
