//! Claim registry and auditor.
//!
//! Every registered claim is a proposition with an explicit domain and a
//! strategy. Symbolic claims compare polynomials exactly for each exponent in
//! the budget. Exhaustive claims walk every point of a finite window.
//! Sampled claims first walk a small deterministic grid, then draw seeded
//! random points, enforcing side conditions by rejection.
//!
//! Witnesses are re-checkable: [`replay_witness`] re-evaluates a stored
//! witness through the same predicates, and a [`WitnessStore`] makes earlier
//! counterexamples survive later runs with different budgets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use num_bigint::RandBigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, binom, exact_root, pow, residue, Integer, OddPrime};
use crate::dickson::{triple_from_pair, DicksonPair};
use crate::forms::{ad_forms, classify_gcd, splitting_rhs};
use crate::poly::{
    build_fg, exact_divide, fermat_gap, k_explicit, k_mod_p, k_poly_cached, pab, Point, Polynomial,
    Rational, Var,
};
use crate::{Error, Result, DEFAULT_SEED};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    Symbolic,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    VerifiedInDomain,
    Falsified,
    Vacuous,
    FormulaMismatch,
    /// The claim could not be run to coverage; carries the error in notes.
    Incomplete,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Outcome::VerifiedInDomain => "VERIFIED_IN_DOMAIN",
            Outcome::Falsified => "FALSIFIED",
            Outcome::Vacuous => "VACUOUS",
            Outcome::FormulaMismatch => "FORMULA_MISMATCH",
            Outcome::Incomplete => "INCOMPLETE",
        })
    }
}

/// Sizes of every domain the auditor walks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckBudget {
    /// Exponents for symbolic and sampled claims.
    pub primes: Vec<u32>,
    /// Exponents for exhaustive claims.
    pub exhaustive_primes: Vec<u32>,
    /// Upper bound of exhaustive windows.
    pub exhaustive_bound: u64,
    /// Every variable of a sampled claim first runs over `1..=grid_bound`.
    pub grid_bound: u64,
    /// Random points per sampled claim, split across its exponents.
    pub samples: u64,
    pub sample_bits: u32,
    pub seed: u64,
    /// Refuse exhaustive windows with more points than this.
    pub max_points: u64,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            primes: vec![3, 5, 7, 11, 13],
            exhaustive_primes: vec![3, 5, 7],
            exhaustive_bound: 300,
            grid_bound: 16,
            samples: 10_000,
            sample_bits: 256,
            seed: DEFAULT_SEED,
            max_points: 100_000_000,
        }
    }
}

impl CheckBudget {
    /// A budget whose exponent sets are empty; every claim is vacuous.
    pub fn empty() -> Self {
        CheckBudget { primes: Vec::new(), exhaustive_primes: Vec::new(), ..Default::default() }
    }

    /// A small budget for smoke runs.
    pub fn quick() -> Self {
        CheckBudget {
            exhaustive_bound: 60,
            grid_bound: 8,
            samples: 500,
            sample_bits: 64,
            ..Default::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "quick" => Ok(Self::quick()),
            "empty" => Ok(Self::empty()),
            other => Err(Error::Parse(format!("unknown budget preset `{other}`"))),
        }
    }

    /// Apply a `key=value` override. Prime lists are comma separated and
    /// may be empty.
    pub fn apply(&mut self, setting: &str) -> Result<()> {
        let (key, value) = setting
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{setting}`")))?;
        let num = |v: &str| v.parse::<u64>().map_err(|e| Error::Parse(format!("{key}: {e}")));
        let list = |v: &str| -> Result<Vec<u32>> {
            v.split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{key}: {e}"))))
                .collect()
        };
        match key {
            "primes" => self.primes = list(value)?,
            "exhaustive_primes" => self.exhaustive_primes = list(value)?,
            "exhaustive_bound" | "bound" => self.exhaustive_bound = num(value)?,
            "grid_bound" | "grid" => self.grid_bound = num(value)?,
            "samples" => self.samples = num(value)?,
            "sample_bits" | "bits" => {
                self.sample_bits = u32::try_from(num(value)?)
                    .map_err(|_| Error::Parse("sample_bits too large".into()))?
            }
            "seed" => self.seed = parse_seed(value)?,
            "max_points" => self.max_points = num(value)?,
            other => return Err(Error::Parse(format!("unknown budget key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for &p in self.primes.iter().chain(&self.exhaustive_primes) {
            OddPrime::new(p)?;
        }
        if self.sample_bits == 0 && self.samples > 0 {
            return Err(Error::Domain("sample_bits must be positive".into()));
        }
        Ok(())
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| Error::Parse(format!("seed `{s}`: {e}")))
}

/// Parameter ranges a verdict covers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub exponents: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub variables: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sample_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub conditions: String,
}

impl Domain {
    fn symbolic(exps: &[u32], conditions: &str) -> Self {
        Domain { exponents: exps.to_vec(), conditions: conditions.into(), ..Default::default() }
    }

    fn exhaustive(exps: &[u32], bound: u64, conditions: &str) -> Self {
        Domain {
            exponents: exps.to_vec(),
            bound: Some(bound),
            conditions: conditions.into(),
            ..Default::default()
        }
    }

    fn sampled(exps: &[u32], vars: &[Var], b: &CheckBudget, conditions: &str) -> Self {
        Domain {
            exponents: exps.to_vec(),
            variables: vars.iter().map(|v| v.name().to_string()).collect(),
            grid_bound: Some(b.grid_bound),
            samples: Some(b.samples),
            sample_bits: Some(b.sample_bits),
            seed: Some(b.seed),
            conditions: conditions.into(),
            ..Default::default()
        }
    }
}

/// A point or polynomial difference exhibiting a violation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Exponent the witness belongs to; absent for exponent-free claims.
    pub p: Option<u32>,
    #[serde(with = "point_map")]
    pub point: Point,
    pub observed: Option<String>,
    pub difference: Option<Polynomial>,
}

mod point_map {
    use serde::de::Error as _;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::poly::{Point, Var};

    pub fn serialize<S: Serializer>(p: &Point, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(p.len()))?;
        for (v, n) in p {
            m.serialize_entry(v.name(), &n.to_string())?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        let raw = std::collections::BTreeMap::<String, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                let var = Var::from_name(&k).ok_or_else(|| D::Error::custom(format!("variable {k}")))?;
                let n = v.parse().map_err(D::Error::custom)?;
                Ok((var, n))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub eq_ref: String,
    pub strategy: Strategy,
    pub domain: Domain,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub checked_count: u64,
    pub notes: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub verified_in_domain: usize,
    pub falsified: usize,
    pub vacuous: usize,
    pub formula_mismatch: usize,
    pub incomplete: usize,
}

impl OutcomeCounts {
    fn tally(claims: &[Verdict]) -> Self {
        let mut c = OutcomeCounts::default();
        for v in claims {
            match v.outcome {
                Outcome::VerifiedInDomain => c.verified_in_domain += 1,
                Outcome::Falsified => c.falsified += 1,
                Outcome::Vacuous => c.vacuous += 1,
                Outcome::FormulaMismatch => c.formula_mismatch += 1,
                Outcome::Incomplete => c.incomplete += 1,
            }
        }
        c
    }
}

/// Wall-clock metadata, attached only outside deterministic mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub elapsed_ms: u128,
    pub started_unix_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: String,
    pub seed: u64,
    pub budget: CheckBudget,
    pub claims: Vec<Verdict>,
    pub counts: OutcomeCounts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub meta: Option<RunMeta>,
}

impl AuditReport {
    pub fn get(&self, id: &str) -> Option<&Verdict> {
        self.claims.iter().find(|v| v.id == id)
    }

    pub fn any_falsified(&self) -> bool {
        self.claims.iter().any(|v| v.outcome == Outcome::Falsified)
    }
}

/// Counterexamples kept across runs, keyed by claim id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStore {
    pub claims: BTreeMap<String, Vec<Witness>>,
}

impl WitnessStore {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    fn record(&mut self, v: &Verdict) {
        if let Some(w) = &v.witness {
            let list = self.claims.entry(v.id.clone()).or_default();
            if !list.contains(w) {
                list.push(w.clone());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Registry.

type RunFn = fn(&CheckBudget) -> Result<Finding>;
type ReplayFn = fn(&Witness) -> Result<bool>;

/// A registered claim.
#[derive(Clone, Serialize)]
pub struct ClaimSpec {
    pub id: &'static str,
    pub eq_ref: &'static str,
    pub statement: &'static str,
    pub strategy: Strategy,
    /// Expected verdict under the default budget.
    pub expected: Option<Outcome>,
    /// Outcome reported when a witness is found.
    pub on_violation: Outcome,
    #[serde(skip)]
    run: RunFn,
    #[serde(skip)]
    replay: Option<ReplayFn>,
}

impl fmt::Debug for ClaimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClaimSpec").field("id", &self.id).finish_non_exhaustive()
    }
}

const V: Option<Outcome> = Some(Outcome::VerifiedInDomain);
const F: Option<Outcome> = Some(Outcome::Falsified);
const M: Option<Outcome> = Some(Outcome::FormulaMismatch);

static REGISTRY: &[ClaimSpec] = &[
    ClaimSpec {
        id: "C-02",
        eq_ref: "(2)",
        statement: "z^n - y^n = (z-y)(z^(n-1) + y^(n-1)) + zy(z^(n-2) - y^(n-2)) for 2 <= n <= max p",
        strategy: Strategy::Sampled,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c02,
        replay: Some(|w| replay_point(&C02, w)),
    },
    ClaimSpec {
        id: "C-04P",
        eq_ref: "(4)",
        statement: "a Dickson pair (a, b) with gcd(a, b) = 1 and 2ab square yields a primitive triple",
        strategy: Strategy::Exhaustive,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c04p,
        replay: Some(replay_c04p),
    },
    ClaimSpec {
        id: "C-10",
        eq_ref: "(10)",
        statement: "phi_p(z, y) = A_p(z, y) + (zy)^k = D_p(z, y) + p (zy)^k",
        strategy: Strategy::Sampled,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c10,
        replay: Some(|w| replay_point(&C10, w)),
    },
    ClaimSpec {
        id: "C-11",
        eq_ref: "(11)",
        statement: "phi_p(x, -y) = (x^p + y^p)/(x + y) = A_p(x, -y) + (-1)^k (xy)^k = D_p(x, -y) + (xy)^k",
        strategy: Strategy::Sampled,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c11,
        replay: Some(|w| replay_point(&C11, w)),
    },
    ClaimSpec {
        id: "C-13",
        eq_ref: "(13)",
        statement: "gcd(z - y, phi_p(z, y)) is 1 or p, and is p exactly when p | z - y",
        strategy: Strategy::Exhaustive,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c13,
        replay: Some(replay_c13),
    },
    ClaimSpec {
        id: "C-14",
        eq_ref: "(14)",
        statement: "p | z - y implies p | phi_p(z, y), and then p^2 does not divide phi_p(z, y)",
        strategy: Strategy::Exhaustive,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c14,
        replay: Some(replay_c14),
    },
    ClaimSpec {
        id: "C-15",
        eq_ref: "(15)/(18)/(24)/(27)",
        statement: "Fermat-little congruences: z^p - y^p = x^p iff z - y = x; p | (x-a)^p iff x = a; \
                    then y = b, z = a + b; p | z^p - y^p iff z = y (all mod p, a = z - y, b = z - x)",
        strategy: Strategy::Sampled,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c15,
        replay: Some(|w| replay_point(&C15, w)),
    },
    ClaimSpec {
        id: "C-16",
        eq_ref: "(16)",
        statement: "the gap (x+y-z)^p - (x^p+y^p-z^p) equals f_p + g_p with g_p in closed form",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c16,
        replay: None,
    },
    ClaimSpec {
        id: "C-17G",
        eq_ref: "(17)",
        statement: "the displayed sum -sum C(p,i) b^(p-i) a^i equals -(b-a)^p + b^p + (-a)^p",
        strategy: Strategy::Symbolic,
        expected: M,
        on_violation: Outcome::FormulaMismatch,
        run: run_c17g,
        replay: Some(replay_c17g),
    },
    ClaimSpec {
        id: "C-21",
        eq_ref: "(21)",
        statement: "p a b divides the gap exactly; K_p is homogeneous of degree p - 2 with content 1",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c21,
        replay: None,
    },
    ClaimSpec {
        id: "C-22",
        eq_ref: "(22)",
        statement: "the explicit double sum for K_p equals the quotient gap / (p a b)",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::FormulaMismatch,
        run: run_c22,
        replay: None,
    },
    ClaimSpec {
        id: "C-23",
        eq_ref: "(23)",
        statement: "p a b is the only common factor of the gap's terms (polynomial content)",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c23,
        replay: None,
    },
    ClaimSpec {
        id: "C-23P",
        eq_ref: "(23)",
        statement: "pointwise: (p a b)^2 never divides p a b K_p at positive integers",
        strategy: Strategy::Sampled,
        expected: F,
        on_violation: Outcome::Falsified,
        run: run_c23p,
        replay: Some(|w| replay_point(&C23P, w)),
    },
    ClaimSpec {
        id: "C-26",
        eq_ref: "(26)",
        statement: "K_p with x -> a equals the displayed two-sum expression (exactly, hence mod p)",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::FormulaMismatch,
        run: run_c26,
        replay: None,
    },
    ClaimSpec {
        id: "C-26N",
        eq_ref: "(26)",
        statement: "universal reading: x = a (mod p) and p not dividing ab imply p does not divide K_p",
        strategy: Strategy::Sampled,
        expected: F,
        on_violation: Outcome::Falsified,
        run: run_c26n,
        replay: Some(|w| replay_point(&C26N, w)),
    },
    ClaimSpec {
        id: "C-29",
        eq_ref: "(29)",
        statement: "K_p(x=a) = h_p + a^(p-2) + b^(p-2) (mod p) with h_3 = 0 and a | h_p for p > 3",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c29,
        replay: None,
    },
    ClaimSpec {
        id: "C-30",
        eq_ref: "(30)",
        statement: "literal reading: x = a (mod p) with p | a gives K_p = b, with p | b gives K_p = a (mod p)",
        strategy: Strategy::Sampled,
        expected: F,
        on_violation: Outcome::Falsified,
        run: run_c30,
        replay: Some(|w| replay_point(&C30, w)),
    },
    ClaimSpec {
        id: "C-31",
        eq_ref: "(31)",
        statement: "2x = c - b + a, 2y = c + b - a, 2z = c + b + a and x - a = y - b = z - (a+b) \
                    with a = z - y, b = z - x, c = x + y",
        strategy: Strategy::Sampled,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_c31,
        replay: Some(|w| replay_point(&C31, w)),
    },
    ClaimSpec {
        id: "C-35",
        eq_ref: "(35)",
        statement: "p = 3: f_3 = 6abx, gap = 6abx + 3ab^2 - 3a^2b = 3ab(2x+b-a), K_3 = 2x+b-a, \
                    K_3(x=a) = a+b (mod 3), (x+y-z)^3 - (x^3+y^3-z^3) = 3(z-y)(z-x)(x+y)",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::FormulaMismatch,
        run: run_c35,
        replay: None,
    },
    ClaimSpec {
        id: "C-35G",
        eq_ref: "(35)",
        statement: "the prose value g_3 = -3ab^2 + 3a^2b equals g_3 in closed form",
        strategy: Strategy::Symbolic,
        expected: M,
        on_violation: Outcome::FormulaMismatch,
        run: run_c35g,
        replay: Some(replay_c35g),
    },
    ClaimSpec {
        id: "C-38",
        eq_ref: "(37)/(38)",
        statement: "the displayed f_5, g_5 and K_5 (after c -> 2x+b-a) equal the computed ones",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::FormulaMismatch,
        run: run_c38,
        replay: None,
    },
    ClaimSpec {
        id: "C-39",
        eq_ref: "(39)",
        statement: "K_5(x=a) = h_5 + a^3 + b^3 (mod 5) with h_5 = 2ab^2 + 2a^2b",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::FormulaMismatch,
        run: run_c39,
        replay: None,
    },
    ClaimSpec {
        id: "C-K5ODD",
        eq_ref: "(38)",
        statement: "K_5 = a + b as a function mod 2, so K_5 is odd exactly when one of a, b is even",
        strategy: Strategy::Symbolic,
        expected: V,
        on_violation: Outcome::Falsified,
        run: run_k5odd,
        replay: Some(|w| replay_point(&K5_PARITY, w)),
    },
    ClaimSpec {
        id: "C-40",
        eq_ref: "(40)",
        statement: "with a = z - y and x = a + R: x^p + y^p - z^p = R^p + sum C(p,i) ((z-y)^(p-i) R^i + (-z)^(p-i) y^i)",
        strategy: Strategy::Sampled,
        expected: M,
        on_violation: Outcome::FormulaMismatch,
        run: run_c40,
        replay: Some(|w| replay_point(&C40, w)),
    },
];

pub fn registry() -> &'static [ClaimSpec] {
    REGISTRY
}

pub fn lookup(id: &str) -> Result<&'static ClaimSpec> {
    REGISTRY.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownClaim(id.to_string()))
}

// ---------------------------------------------------------------------------
// Running.

/// What a claim's check produced, before registry metadata is attached.
#[derive(Debug)]
struct Finding {
    domain: Domain,
    violated: bool,
    witness: Option<Witness>,
    checked: u64,
    notes: Vec<String>,
}

impl Finding {
    fn new(domain: Domain) -> Self {
        Finding { domain, violated: false, witness: None, checked: 0, notes: Vec::new() }
    }
}

pub fn run_claim(id: &str, budget: &CheckBudget) -> Result<Verdict> {
    run_claim_with(id, budget, &WitnessStore::default())
}

/// Run one claim. Stored witnesses are replayed first, so a counterexample
/// found once is never lost to a smaller budget.
pub fn run_claim_with(id: &str, budget: &CheckBudget, store: &WitnessStore) -> Result<Verdict> {
    let entry = lookup(id)?;
    budget.validate()?;
    let mut f = (entry.run)(budget)?;
    if !f.violated {
        if let (Some(replay), Some(stored)) = (entry.replay, store.claims.get(id)) {
            for w in stored {
                if replay(w)? {
                    f.violated = true;
                    f.witness = Some(w.clone());
                    f.notes.push("persisted counterexample replayed".into());
                    break;
                }
            }
        }
    }
    let outcome = if f.violated {
        entry.on_violation
    } else if f.checked == 0 {
        Outcome::Vacuous
    } else {
        Outcome::VerifiedInDomain
    };
    Ok(Verdict {
        id: entry.id.into(),
        eq_ref: entry.eq_ref.into(),
        strategy: entry.strategy,
        domain: f.domain,
        outcome,
        witness: f.witness,
        checked_count: f.checked,
        notes: f.notes.join("; "),
    })
}

pub fn run_all(budget: &CheckBudget) -> AuditReport {
    let ids: Vec<&str> = REGISTRY.iter().map(|c| c.id).collect();
    run_claims(&ids, budget, &mut WitnessStore::default()).expect("registered ids")
}

/// Run the given claims in parallel and assemble the report in the order
/// given. Per-claim failures become `INCOMPLETE` entries. New witnesses are
/// added to `store`.
pub fn run_claims(ids: &[&str], budget: &CheckBudget, store: &mut WitnessStore) -> Result<AuditReport> {
    let specs: Vec<&ClaimSpec> = ids.iter().map(|id| lookup(id)).collect::<Result<_>>()?;
    let snapshot = &*store;
    let claims: Vec<Verdict> = specs
        .par_iter()
        .map(|entry| {
            log::debug!("auditing {}", entry.id);
            run_claim_with(entry.id, budget, snapshot).unwrap_or_else(|e| Verdict {
                id: entry.id.into(),
                eq_ref: entry.eq_ref.into(),
                strategy: entry.strategy,
                domain: Domain::default(),
                outcome: Outcome::Incomplete,
                witness: None,
                checked_count: 0,
                notes: e.to_string(),
            })
        })
        .collect();
    for v in &claims {
        store.record(v);
    }
    Ok(AuditReport {
        schema_version: SCHEMA_VERSION.into(),
        seed: budget.seed,
        budget: budget.clone(),
        counts: OutcomeCounts::tally(&claims),
        claims,
        meta: None,
    })
}

/// Whether `w` still exhibits a violation of claim `id` when re-evaluated.
pub fn replay_witness(id: &str, w: &Witness) -> Result<bool> {
    let entry = lookup(id)?;
    match entry.replay {
        Some(replay) => replay(w),
        None => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// Pointwise engine.

type Holds = fn(u32, &Point) -> Result<Option<bool>>;

/// A pointwise predicate. `holds` returns `None` when the point fails the
/// side conditions.
struct PointClaim {
    vars: &'static [Var],
    holds: Holds,
    observe: fn(u32, &Point) -> String,
    /// Counts points satisfying `x^p + y^p = z^p`, for the conditioned
    /// reading.
    fermat: Option<fn(u32, &Point) -> bool>,
}

#[derive(Debug, Default)]
struct ExpScan {
    exp: u32,
    accepted: u64,
    violations: u64,
    first: Option<Point>,
    fermat_hits: u64,
}

fn stream_id(key: &str, exp: u32) -> u64 {
    // FNV-1a over the key, then the exponent.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes().chain(exp.to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Grid points over `1..=g` per variable, first variable outermost.
fn grid(vars: &[Var], g: u64) -> impl Iterator<Item = Point> + '_ {
    let n = vars.len() as u32;
    let total = if g == 0 || n == 0 { 0 } else { g.pow(n) };
    (0..total).map(move |mut idx| {
        let mut digits = vec![0u64; vars.len()];
        for d in digits.iter_mut().rev() {
            *d = idx % g + 1;
            idx /= g;
        }
        vars.iter().zip(digits).map(|(&v, d)| (v, Integer::from(d))).collect()
    })
}

const MAX_REJECTION: u64 = 2_000;

fn scan(b: &CheckBudget, key: &str, claim: &PointClaim, exps: &[u32]) -> Result<Vec<ExpScan>> {
    let mut out = Vec::with_capacity(exps.len());
    let n = exps.len() as u64;
    for (i, &e) in exps.iter().enumerate() {
        let mut s = ExpScan { exp: e, ..Default::default() };
        let visit = |pt: Point, s: &mut ExpScan| -> Result<bool> {
            let Some(ok) = (claim.holds)(e, &pt)? else {
                return Ok(false);
            };
            s.accepted += 1;
            if claim.fermat.is_some_and(|f| f(e, &pt)) {
                s.fermat_hits += 1;
            }
            if !ok {
                s.violations += 1;
                if s.first.is_none() {
                    s.first = Some(pt);
                }
            }
            Ok(true)
        };
        for pt in grid(claim.vars, b.grid_bound) {
            visit(pt, &mut s)?;
        }
        let want = b.samples / n + u64::from((i as u64) < b.samples % n);
        let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
        rng.set_stream(stream_id(key, e));
        let (mut got, mut draws) = (0u64, 0u64);
        let cap = want.saturating_mul(MAX_REJECTION);
        while got < want && draws < cap {
            draws += 1;
            let pt: Point = claim
                .vars
                .iter()
                .map(|&v| (v, Integer::from(rng.gen_biguint(u64::from(b.sample_bits))) + 1))
                .collect();
            if visit(pt, &mut s)? {
                got += 1;
            }
        }
        if got < want {
            log::warn!("{key}: only {got} of {want} samples met the side conditions for p={e}");
        }
        out.push(s);
    }
    Ok(out)
}

fn exp_label(e: u32) -> Option<u32> {
    (e != 0).then_some(e)
}

/// Fold per-exponent scans into a finding; the first violating exponent in
/// scan order supplies the witness.
fn absorb(f: &mut Finding, claim: &PointClaim, scans: &[ExpScan], conditioned: bool) {
    for s in scans {
        f.checked += s.accepted;
        if s.violations > 0 {
            f.notes.push(match exp_label(s.exp) {
                Some(p) => format!("p={p}: {} of {} points violate", s.violations, s.accepted),
                None => format!("{} of {} points violate", s.violations, s.accepted),
            });
        }
        if let (Some(pt), false) = (&s.first, f.violated) {
            f.violated = true;
            f.witness = Some(Witness {
                p: exp_label(s.exp),
                point: pt.clone(),
                observed: Some((claim.observe)(s.exp, pt)),
                difference: None,
            });
        }
    }
    if conditioned {
        let hits: u64 = scans.iter().map(|s| s.fermat_hits).sum();
        let total: u64 = scans.iter().map(|s| s.accepted).sum();
        f.notes.push(if hits == 0 {
            format!("hypothesis-conditioned reading: VACUOUS (0 of {total} points satisfy x^p + y^p = z^p)")
        } else {
            format!("hypothesis-conditioned reading: {hits} of {total} points satisfy x^p + y^p = z^p")
        });
    }
}

fn replay_point(claim: &PointClaim, w: &Witness) -> Result<bool> {
    if !claim.vars.iter().all(|v| w.point.contains_key(v)) {
        return Ok(false);
    }
    Ok((claim.holds)(w.p.unwrap_or(0), &w.point)? == Some(false))
}

fn sampled_exps(b: &CheckBudget) -> Vec<u32> {
    b.primes.clone()
}

/// Exponent-free claims still run only when the exponent set is non-empty.
fn unit_exps(b: &CheckBudget) -> Vec<u32> {
    if b.primes.is_empty() {
        Vec::new()
    } else {
        vec![0]
    }
}

fn run_points(
    b: &CheckBudget,
    key: &str,
    claim: &PointClaim,
    exps: &[u32],
    conditions: &str,
) -> Result<Finding> {
    let mut f = Finding::new(Domain::sampled(exps, claim.vars, b, conditions));
    let scans = scan(b, key, claim, exps)?;
    absorb(&mut f, claim, &scans, claim.fermat.is_some());
    Ok(f)
}

fn get(pt: &Point, v: Var) -> &Integer {
    &pt[&v]
}

fn modp(n: &Integer, p: u32) -> u64 {
    residue(n, u64::from(p))
}

fn k_at(p: u32, pt: &Point) -> Result<Integer> {
    k_poly_cached(p)?.evaluate_int(pt)
}

/// `x^p + y^p = z^p` with `y = x + b - a`, `z = x + b`.
fn fermat_xab(p: u32, pt: &Point) -> bool {
    let (x, a, b) = (get(pt, Var::X), get(pt, Var::A), get(pt, Var::B));
    let y = x + b - a;
    let z = x + b;
    y.is_positive() && pow(x, p) + pow(&y, p) == pow(&z, p)
}

fn fermat_xyz(p: u32, pt: &Point) -> bool {
    let (x, y, z) = (get(pt, Var::X), get(pt, Var::Y), get(pt, Var::Z));
    pow(x, p) + pow(y, p) == pow(z, p)
}

fn show(pt: &Point) -> String {
    pt.iter().map(|(v, n)| format!("{v}={n}")).collect::<Vec<_>>().join(", ")
}

fn observe_k(p: u32, pt: &Point) -> String {
    match k_at(p, pt) {
        Ok(k) => format!("K_{p} = {k} at {}", show(pt)),
        Err(e) => e.to_string(),
    }
}

// C-02

static C02: PointClaim = PointClaim {
    vars: &[Var::Y, Var::Z],
    holds: |n, pt| {
        let (y, z) = (get(pt, Var::Y), get(pt, Var::Z));
        Ok(Some(pow(z, n) - pow(y, n) == splitting_rhs(n, z, y)))
    },
    observe: |n, pt| format!("n={n}, {}", show(pt)),
    fermat: None,
};

fn run_c02(b: &CheckBudget) -> Result<Finding> {
    let exps: Vec<u32> = match b.primes.iter().max() {
        Some(&top) => (2..=top).collect(),
        None => Vec::new(),
    };
    run_points(b, "C-02", &C02, &exps, "integers y, z; every n in 2..=max p")
}

// C-04P

fn run_c04p(b: &CheckBudget) -> Result<Finding> {
    let bound = if b.primes.is_empty() { 0 } else { b.exhaustive_bound };
    let mut f = Finding::new(Domain::exhaustive(&[], bound, "1 <= a, b <= bound, 2ab square"));
    if u128::from(bound) * u128::from(bound) > u128::from(b.max_points) {
        return Err(Error::Incomplete(format!("C-04P: {bound}^2 pairs exceed max_points")));
    }
    let mut necessity_failures = 0u64;
    let mut square_pairs = 0u64;
    for a in 1..=bound {
        for bb in 1..=bound {
            let two_ab = 2 * u128::from(a) * u128::from(bb);
            let m = two_ab.isqrt();
            if m * m != two_ab {
                continue;
            }
            square_pairs += 1;
            let t = triple_from_pair(&DicksonPair::new(a, bb)?).expect("2ab is square");
            let coprime = a.gcd(&bb) == 1;
            if coprime != t.primitive {
                necessity_failures += u64::from(!coprime);
            }
            if !coprime {
                continue;
            }
            f.checked += 1;
            if !t.primitive && !f.violated {
                f.violated = true;
                f.witness = Some(Witness {
                    p: None,
                    point: [(Var::A, a.into()), (Var::B, bb.into())].into(),
                    observed: Some(format!("triple ({}, {}, {}) not primitive", t.x, t.y, t.z)),
                    difference: None,
                });
            }
        }
    }
    if square_pairs > 0 {
        f.notes.push(format!(
            "necessity (primitive implies gcd(a, b) = 1): {} over {square_pairs} square pairs",
            if necessity_failures == 0 { "holds".to_string() } else { format!("{necessity_failures} failures") }
        ));
    }
    Ok(f)
}

fn replay_c04p(w: &Witness) -> Result<bool> {
    let (Some(a), Some(b)) = (w.point.get(&Var::A), w.point.get(&Var::B)) else {
        return Ok(false);
    };
    let Some(t) = triple_from_pair(&DicksonPair::new(a.clone(), b.clone())?) else {
        return Ok(false);
    };
    Ok(a.gcd(b).is_one() && !t.primitive)
}

// C-10, C-11

fn odd_prime(p: u32) -> Result<OddPrime> {
    OddPrime::new(p)
}

static C10: PointClaim = PointClaim {
    vars: &[Var::Y, Var::Z],
    holds: |p, pt| {
        let (y, z) = (get(pt, Var::Y), get(pt, Var::Z));
        if y >= z {
            return Ok(None);
        }
        let pair = ad_forms(odd_prime(p)?, z, y, false);
        Ok(Some(pair.holds() && &pair.phi * (z - y) == pow(z, p) - pow(y, p)))
    },
    observe: |p, pt| {
        let pair = ad_forms(OddPrime::new(p).expect("odd prime"), get(pt, Var::Z), get(pt, Var::Y), false);
        format!("phi = {}, A + (zy)^k = {}, D + p(zy)^k = {}", pair.phi, pair.via_a(), pair.via_d())
    },
    fermat: None,
};

fn run_c10(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-10", &C10, &sampled_exps(b), "0 < y < z")
}

static C11: PointClaim = PointClaim {
    vars: &[Var::X, Var::Y],
    holds: |p, pt| {
        let (x, y) = (get(pt, Var::X), get(pt, Var::Y));
        let pair = ad_forms(odd_prime(p)?, x, y, true);
        Ok(Some(pair.holds() && &pair.phi * (x + y) == pow(x, p) + pow(y, p)))
    },
    observe: |p, pt| {
        let pair = ad_forms(OddPrime::new(p).expect("odd prime"), get(pt, Var::X), get(pt, Var::Y), true);
        format!("phi = {}, via A = {}, via D = {}", pair.phi, pair.via_a(), pair.via_d())
    },
    fermat: None,
};

fn run_c11(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-11", &C11, &sampled_exps(b), "positive x, y")
}

// C-13, C-14

/// Walk every coprime `1 <= y < z <= bound` for each exponent. `check`
/// returns `None` when the hypothesis fails.
fn coprime_window(
    b: &CheckBudget,
    id: &str,
    conditions: &str,
    check: fn(OddPrime, &Integer, &Integer) -> Result<Option<(bool, String)>>,
) -> Result<Finding> {
    let bound = b.exhaustive_bound;
    let exps = &b.exhaustive_primes;
    let mut f = Finding::new(Domain::exhaustive(exps, bound, conditions));
    let pairs = u128::from(bound) * u128::from(bound.saturating_sub(1)) / 2;
    if pairs * exps.len() as u128 > u128::from(b.max_points) {
        return Err(Error::Incomplete(format!(
            "{id}: {} points exceed max_points = {}",
            pairs * exps.len() as u128,
            b.max_points
        )));
    }
    let mut fermat_hits = 0u64;
    let mut scanned = 0u64;
    for &p in exps {
        let op = odd_prime(p)?;
        // Per z: (checked, violations, first witness, Fermat hits, coprime pairs).
        type Row = (u64, u64, Option<(u64, u64, String)>, u64, u64);
        let rows: Vec<Result<Row>> = (2..=bound)
            .into_par_iter()
            .map(|z| {
                let mut row: Row = (0, 0, None, 0, 0);
                for y in 1..z {
                    if y.gcd(&z) != 1 {
                        continue;
                    }
                    row.4 += 1;
                    let (yi, zi) = (Integer::from(y), Integer::from(z));
                    if exact_root(&(pow(&zi, p) - pow(&yi, p)), p).is_some() {
                        row.3 += 1;
                    }
                    let Some((ok, observed)) = check(op, &yi, &zi)? else {
                        continue;
                    };
                    row.0 += 1;
                    if !ok {
                        row.1 += 1;
                        row.2.get_or_insert((y, z, observed));
                    }
                }
                Ok(row)
            })
            .collect();
        let mut violations = 0;
        for row in rows {
            let (checked, bad, first, hits, coprime) = row?;
            f.checked += checked;
            violations += bad;
            fermat_hits += hits;
            scanned += coprime;
            if let (Some((y, z, observed)), false) = (first, f.violated) {
                f.violated = true;
                f.witness = Some(Witness {
                    p: Some(p),
                    point: [(Var::Y, y.into()), (Var::Z, z.into())].into(),
                    observed: Some(observed),
                    difference: None,
                });
            }
        }
        if violations > 0 {
            f.notes.push(format!("p={p}: {violations} violations"));
        }
    }
    if !exps.is_empty() {
        f.notes.push(format!(
            "hypothesis-conditioned reading: VACUOUS ({fermat_hits} of {scanned} coprime pairs have z^p - y^p a p-th power)"
        ));
    }
    Ok(f)
}

fn check_c13(p: OddPrime, y: &Integer, z: &Integer) -> Result<Option<(bool, String)>> {
    let c = classify_gcd(p, y, z)?;
    let pp = p.to_integer();
    let ok = (c.g.is_one() || c.g == pp) && (c.g == pp) == c.divides;
    Ok(Some((ok, format!("gcd = {}, p | z - y: {}", c.g, c.divides))))
}

fn check_c14(p: OddPrime, y: &Integer, z: &Integer) -> Result<Option<(bool, String)>> {
    let c = classify_gcd(p, y, z)?;
    if !c.divides {
        return Ok(None);
    }
    Ok(Some((c.phi_valuation == 1, format!("nu_p(phi) = {}", c.phi_valuation))))
}

fn run_c13(b: &CheckBudget) -> Result<Finding> {
    coprime_window(b, "C-13", "coprime 1 <= y < z <= bound", check_c13)
}

fn run_c14(b: &CheckBudget) -> Result<Finding> {
    coprime_window(b, "C-14", "coprime 1 <= y < z <= bound, p | z - y", check_c14)
}

fn replay_pair(w: &Witness, check: fn(OddPrime, &Integer, &Integer) -> Result<Option<(bool, String)>>) -> Result<bool> {
    let (Some(p), Some(y), Some(z)) = (w.p, w.point.get(&Var::Y), w.point.get(&Var::Z)) else {
        return Ok(false);
    };
    Ok(matches!(check(odd_prime(p)?, y, z)?, Some((false, _))))
}

fn replay_c13(w: &Witness) -> Result<bool> {
    replay_pair(w, check_c13)
}

fn replay_c14(w: &Witness) -> Result<bool> {
    replay_pair(w, check_c14)
}

// C-15

static C15: PointClaim = PointClaim {
    vars: &[Var::X, Var::Y, Var::Z],
    holds: |p, pt| {
        let (x, y, z) = (get(pt, Var::X), get(pt, Var::Y), get(pt, Var::Z));
        let m = Integer::from(p);
        let pw = |n: &Integer| n.modpow(&m, &m);
        let (a, b) = (z - y, z - x);
        let x_minus_a = x - &a;
        let e15 = (pw(z) - pw(y) - pw(x)).mod_floor(&m) == (z - y - x).mod_floor(&m);
        let zero_pow = modp(&pow(&x_minus_a, p), p) == 0;
        let e18 = zero_pow == (modp(&x_minus_a, p) == 0);
        let e24 = !zero_pow
            || (modp(&(x - &a), p) == 0 && modp(&(y - &b), p) == 0 && modp(&(z - &a - &b), p) == 0);
        let e27 = (modp(&(pw(z) - pw(y)), p) == 0) == (modp(&(z - y), p) == 0);
        Ok(Some(e15 && e18 && e24 && e27))
    },
    observe: |p, pt| format!("p={p}, {}", show(pt)),
    fermat: Some(fermat_xyz),
};

fn run_c15(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-15", &C15, &sampled_exps(b), "positive x, y, z; unconditional congruence reading")
}

// Symbolic helpers.

struct Comparison {
    label: String,
    lhs: Polynomial,
    rhs: Polynomial,
}

fn cmp(label: impl Into<String>, lhs: Polynomial, rhs: Polynomial) -> Comparison {
    Comparison { label: label.into(), lhs, rhs }
}

/// Compare every `(lhs, rhs)` pair for every exponent; the first
/// disagreement becomes the witness.
fn compare_all(
    exps: &[u32],
    conditions: &str,
    build: impl Fn(u32) -> Result<Vec<Comparison>>,
) -> Result<Finding> {
    let mut f = Finding::new(Domain::symbolic(exps, conditions));
    let mut mismatched = Vec::new();
    for &p in exps {
        for c in build(p)? {
            f.checked += 1;
            if c.lhs != c.rhs {
                mismatched.push(format!("p={p} ({})", c.label));
                if !f.violated {
                    f.violated = true;
                    f.witness = Some(Witness {
                        p: Some(p),
                        point: Point::new(),
                        observed: Some(c.label.clone()),
                        difference: Some(&c.lhs - &c.rhs),
                    });
                }
            }
        }
    }
    if !mismatched.is_empty() {
        f.notes.push(format!("mismatch at {}", mismatched.join(", ")));
    }
    Ok(f)
}

fn parse(s: &str) -> Polynomial {
    s.parse().expect("well-formed literal")
}

fn var(v: Var) -> Polynomial {
    Polynomial::var(v)
}

fn only(b: &CheckBudget, p: u32) -> Vec<u32> {
    if b.primes.contains(&p) {
        vec![p]
    } else {
        Vec::new()
    }
}

// C-16, C-17G

fn run_c16(b: &CheckBudget) -> Result<Finding> {
    let mut f = compare_all(&b.primes, "exact polynomial identity in x, a, b", |p| {
        let fg = build_fg(odd_prime(p)?);
        Ok(vec![cmp("gap = f + g", fermat_gap(p)?, &fg.f + &fg.g_closed)])
    })?;
    if !b.primes.is_empty() {
        f.notes.push(
            "literal (x-a)^p = f_p + g_p needs x^p + y^p = z^p; hypothesis-conditioned reading: VACUOUS".into(),
        );
    }
    Ok(f)
}

fn g_sum_vs_closed(p: u32) -> Result<Comparison> {
    let fg = build_fg(odd_prime(p)?);
    Ok(cmp("displayed sum vs closed form", fg.g_sum, fg.g_closed))
}

fn run_c17g(b: &CheckBudget) -> Result<Finding> {
    let mut f = compare_all(&b.primes, "exact polynomial identity in a, b", |p| Ok(vec![g_sum_vs_closed(p)?]))?;
    if f.violated {
        f.notes.push("the displayed sum drops the sign (-1)^i carried by (-a)^i".into());
    }
    Ok(f)
}

fn replay_symbolic(w: &Witness, build: fn(u32) -> Result<Comparison>) -> Result<bool> {
    let Some(p) = w.p else { return Ok(false) };
    let c = build(p)?;
    let diff = &c.lhs - &c.rhs;
    Ok(!diff.is_zero() && w.difference.as_ref().is_none_or(|d| *d == diff))
}

fn replay_c17g(w: &Witness) -> Result<bool> {
    replay_symbolic(w, g_sum_vs_closed)
}

// C-21, C-22, C-23

fn homogeneous_part(q: &Polynomial, degree: u32) -> Polynomial {
    q.terms()
        .filter(|(e, _)| e.degree() == degree)
        .fold(Polynomial::zero(), |acc, (e, c)| acc + Polynomial::term(c.clone(), *e))
}

fn run_c21(b: &CheckBudget) -> Result<Finding> {
    compare_all(&b.primes, "exact polynomial identity in x, a, b", |p| {
        let gap = fermat_gap(p)?;
        let (k, rem) = gap.div_rem(&pab(p))?;
        let (content, mono) = k.content();
        Ok(vec![
            cmp("remainder", rem, Polynomial::zero()),
            cmp("p a b K = gap", &pab(p) * &k, gap),
            cmp("homogeneous of degree p-2", homogeneous_part(&k, p - 2), k.clone()),
            cmp("content 1", Polynomial::term(content, mono), Polynomial::one()),
        ])
    })
}

fn run_c22(b: &CheckBudget) -> Result<Finding> {
    compare_all(&b.primes, "exact polynomial identity in x, a, b", |p| {
        Ok(vec![cmp("explicit vs division", k_explicit(p), exact_divide(&fermat_gap(p)?, &pab(p))?)])
    })
}

fn run_c23(b: &CheckBudget) -> Result<Finding> {
    compare_all(&b.primes, "content of the gap polynomial", |p| {
        let (content, mono) = fermat_gap(p)?.content();
        Ok(vec![cmp("gap content", Polynomial::term(content, mono), pab(p))])
    })
}

static C23P: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| {
        let k = k_at(p, pt)?;
        let m = Integer::from(p) * get(pt, Var::A) * get(pt, Var::B);
        Ok(Some(!(k % m).is_zero()))
    },
    observe: |p, pt| {
        let k = k_at(p, pt).unwrap_or_default();
        let m = Integer::from(p) * get(pt, Var::A) * get(pt, Var::B);
        format!("K_{p} = {k} is divisible by p a b = {m}")
    },
    fermat: Some(fermat_xab),
};

fn run_c23p(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-23P", &C23P, &sampled_exps(b), "positive a, b, x")
}

// C-26, C-26N

/// `2 sum_{i=1}^{k} C(2k,2i-2)/(2i-1) b^(2i-2) a^(2k-2i+1)
///  - sum_{j=1}^{2k} (-1)^j C(2k,j-1)/j b^(2k-j) a^(j-1)`.
fn k_residue_display(p: u32) -> Polynomial {
    let k = (p - 1) / 2;
    let (a, b) = (var(Var::A), var(Var::B));
    let kk = u64::from(2 * k);
    let mut out = Polynomial::zero();
    for i in 1..=k {
        let c = Rational::new(2 * binom(kk, u64::from(2 * i - 2)), Integer::from(2 * i - 1));
        out = out + (b.pow(2 * (i - 1)) * a.pow(2 * (k - i) + 1)).scale(&c);
    }
    for j in 1..=2 * k {
        let c = Rational::new(arith::sign_pow(j) * binom(kk, u64::from(j - 1)), Integer::from(j));
        out = out - (b.pow(2 * k - j) * a.pow(j - 1)).scale(&c);
    }
    out
}

fn run_c26(b: &CheckBudget) -> Result<Finding> {
    compare_all(&b.primes, "K_p(x=a) as a polynomial in a, b, exactly and mod p", |p| {
        let kxa = k_poly_cached(p)?.substitute(Var::X, &var(Var::A));
        let shown = k_residue_display(p);
        let m = u64::from(p);
        Ok(vec![
            cmp("exact", kxa.clone(), shown.clone()),
            cmp("mod p", kxa.reduce_mod(m)?, shown.reduce_mod(m)?),
        ])
    })
}

static C26N: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| {
        let (a, b, x) = (get(pt, Var::A), get(pt, Var::B), get(pt, Var::X));
        if modp(&(x - a), p) != 0 || modp(a, p) == 0 || modp(b, p) == 0 {
            return Ok(None);
        }
        Ok(Some(modp(&k_at(p, pt)?, p) != 0))
    },
    observe: observe_k,
    fermat: Some(fermat_xab),
};

fn run_c26n(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-26N", &C26N, &sampled_exps(b), "positive a, b, x; x = a (mod p); p does not divide ab")
}

// C-29

fn run_c29(b: &CheckBudget) -> Result<Finding> {
    let mut f = compare_all(&b.primes, "K_p(x=a) mod p as a polynomial in a, b", |p| {
        let op = odd_prime(p)?;
        let km = k_mod_p(op)?;
        let (a, bb) = (var(Var::A), var(Var::B));
        let rebuilt = (&km.h + a.pow(p - 2) + bb.pow(p - 2)).reduce_mod(u64::from(p))?;
        let mut out = vec![cmp("h + a^(p-2) + b^(p-2)", rebuilt, km.reduced.clone())];
        if p == 3 {
            out.push(cmp("h_3 = 0", km.h, Polynomial::zero()));
        } else {
            let (_, rem) = km.h.div_rem(&a)?;
            out.push(cmp("a | h_p", rem, Polynomial::zero()));
        }
        Ok(out)
    })?;
    if !b.primes.is_empty() {
        f.notes.push(
            "the coefficients of a^(p-2) and b^(p-2) in K_p(x=a) are both 1, so h_p(b, 0) = h_p(0, a) = 0".into(),
        );
    }
    Ok(f)
}

// C-30

fn case_one(p: u32, pt: &Point) -> Option<()> {
    let (a, b, x) = (get(pt, Var::A), get(pt, Var::B), get(pt, Var::X));
    (modp(a, p) == 0 && modp(b, p) != 0 && modp(&(x - a), p) == 0).then_some(())
}

fn case_two(p: u32, pt: &Point) -> Option<()> {
    let (a, b, x) = (get(pt, Var::A), get(pt, Var::B), get(pt, Var::X));
    (modp(b, p) == 0 && modp(a, p) != 0 && modp(&(x - a), p) == 0).then_some(())
}

fn k_matches(p: u32, pt: &Point, target: &Integer) -> Result<Option<bool>> {
    Ok(Some(modp(&(k_at(p, pt)? - target), p) == 0))
}

static C30_I: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| match case_one(p, pt) {
        Some(()) => k_matches(p, pt, get(pt, Var::B)),
        None => Ok(None),
    },
    observe: observe_k,
    fermat: Some(fermat_xab),
};

static C30_II: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| match case_two(p, pt) {
        Some(()) => k_matches(p, pt, get(pt, Var::A)),
        None => Ok(None),
    },
    observe: observe_k,
    fermat: Some(fermat_xab),
};

static C30: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| match (C30_I.holds)(p, pt)? {
        Some(v) => Ok(Some(v)),
        None => (C30_II.holds)(p, pt),
    },
    observe: observe_k,
    fermat: Some(fermat_xab),
};

static C30_POWER_I: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| match case_one(p, pt) {
        Some(()) => k_matches(p, pt, &pow(get(pt, Var::B), p - 2)),
        None => Ok(None),
    },
    observe: observe_k,
    fermat: None,
};

static C30_POWER_II: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| match case_two(p, pt) {
        Some(()) => k_matches(p, pt, &pow(get(pt, Var::A), p - 2)),
        None => Ok(None),
    },
    observe: observe_k,
    fermat: None,
};

fn run_c30(b: &CheckBudget) -> Result<Finding> {
    let exps = sampled_exps(b);
    let cond = "positive a, b, x; x = a (mod p); case I: p | a, p does not divide b; case II: the reverse";
    let mut f = Finding::new(Domain::sampled(&exps, C30.vars, b, cond));
    // Case I is scanned before case II.
    let one = scan(b, "C-30/I", &C30_I, &exps)?;
    let two = scan(b, "C-30/II", &C30_II, &exps)?;
    for (label, scans) in [("case I", &one), ("case II", &two)] {
        for s in scans.iter() {
            let verdict = if s.accepted == 0 {
                "no points".to_string()
            } else if s.violations == 0 {
                format!("holds on {} points", s.accepted)
            } else {
                format!("fails on {} of {} points", s.violations, s.accepted)
            };
            f.notes.push(format!("{label} p={}: {verdict}", s.exp));
        }
    }
    let mut quiet = Finding::new(Domain::default());
    absorb(&mut quiet, &C30, &one, false);
    absorb(&mut quiet, &C30, &two, false);
    f.checked = quiet.checked;
    f.violated = quiet.violated;
    f.witness = quiet.witness;

    let pi = scan(b, "C-30/I", &C30_POWER_I, &exps)?;
    let pii = scan(b, "C-30/II", &C30_POWER_II, &exps)?;
    let total: u64 = pi.iter().chain(&pii).map(|s| s.accepted).sum();
    let bad: u64 = pi.iter().chain(&pii).map(|s| s.violations).sum();
    if total > 0 {
        f.notes.push(format!(
            "variant K_p = b^(p-2) (case I), a^(p-2) (case II): {}",
            if bad == 0 { format!("VERIFIED_IN_DOMAIN on {total} points") } else { format!("FALSIFIED on {bad} of {total} points") }
        ));
    }
    let hits: u64 = one.iter().chain(&two).map(|s| s.fermat_hits).sum();
    if f.checked > 0 {
        f.notes.push(format!(
            "hypothesis-conditioned reading: VACUOUS ({hits} of {} points satisfy x^p + y^p = z^p)",
            f.checked
        ));
    }
    Ok(f)
}

// C-31

static C31: PointClaim = PointClaim {
    vars: &[Var::X, Var::Y, Var::Z],
    holds: |_, pt| {
        let (x, y, z) = (get(pt, Var::X), get(pt, Var::Y), get(pt, Var::Z));
        let (a, b, c) = (z - y, z - x, x + y);
        let two = |n: &Integer| Integer::from(2) * n;
        Ok(Some(
            two(x) == &c - &b + &a
                && two(y) == &c + &b - &a
                && two(z) == &c + &b + &a
                && x - &a == y - &b
                && y - &b == z - (&a + &b)
                && Integer::from(2) * x + &b - &a == c
                && *y == x + &b - &a,
        ))
    },
    observe: |_, pt| show(pt),
    fermat: None,
};

fn run_c31(b: &CheckBudget) -> Result<Finding> {
    run_points(b, "C-31", &C31, &unit_exps(b), "positive x, y, z")
}

// C-35, C-35G

fn run_c35(b: &CheckBudget) -> Result<Finding> {
    compare_all(&only(b, 3), "exact polynomial identities at p = 3", |p| {
        let fg = build_fg(odd_prime(p)?);
        let gap = fermat_gap(p)?;
        let (x, y, z) = (var(Var::X), var(Var::Y), var(Var::Z));
        let xyz_gap = (&x + &y - &z).pow(3) - (x.pow(3) + y.pow(3) - z.pow(3));
        Ok(vec![
            cmp("f_3 = 6abx", fg.f, parse("6*a*b*x")),
            cmp("gap = 6abx + 3ab^2 - 3a^2b", gap.clone(), parse("6*a*b*x + 3*a*b^2 - 3*a^2*b")),
            cmp("gap = 3ab(2x+b-a)", gap, parse("3*a*b") * parse("2*x + b - a")),
            cmp("K_3 = 2x+b-a", (*k_poly_cached(3)?).clone(), parse("2*x + b - a")),
            cmp("K_3(x=a) = a+b (mod 3)", k_mod_p(odd_prime(3)?)?.reduced, parse("a + b")),
            cmp(
                "(x+y-z)^3 - (x^3+y^3-z^3) = 3(z-y)(z-x)(x+y)",
                xyz_gap,
                parse("3") * (&z - &y) * (&z - &x) * (&x + &y),
            ),
        ])
    })
}

fn prose_g3(p: u32) -> Result<Comparison> {
    let fg = build_fg(odd_prime(p)?);
    Ok(cmp("prose g_3 vs closed form", parse("-3*a*b^2 + 3*a^2*b"), fg.g_closed))
}

fn run_c35g(b: &CheckBudget) -> Result<Finding> {
    let mut f = compare_all(&only(b, 3), "exact polynomial identity at p = 3", |p| Ok(vec![prose_g3(p)?]))?;
    if f.violated {
        f.notes.push("closed form gives g_3 = 3ab^2 - 3a^2b; the displayed gap already uses that sign".into());
    }
    Ok(f)
}

fn replay_c35g(w: &Witness) -> Result<bool> {
    replay_symbolic(w, prose_g3)
}

// C-38, C-39

fn run_c38(b: &CheckBudget) -> Result<Finding> {
    compare_all(&only(b, 5), "exact polynomial identities at p = 5", |p| {
        let fg = build_fg(odd_prime(p)?);
        let c = parse("2*x + b - a");
        let shown_k = parse("4*x^3 + 6*b*x^2 - 6*a*x^2 + 4*b^2*x - 2*a*b*x + 4*a^2*x - 2*a*b*c + b^3 - a^3");
        let shown_f = parse("5*a*b") * parse("4*x^3 - 6*a*x^2 + 4*a^2*x + 6*b*x^2 + 4*b^2*x - 6*a*b*x");
        let shown_g = parse("5*a*b") * parse("b^3 - 2*a*b^2 + 2*a^2*b - a^3");
        Ok(vec![
            cmp("f_5", fg.f, shown_f),
            cmp("g_5", fg.g_closed, shown_g),
            cmp("K_5 after c -> 2x+b-a", shown_k.substitute(Var::C, &c), (*k_poly_cached(5)?).clone()),
        ])
    })
}

fn run_c39(b: &CheckBudget) -> Result<Finding> {
    compare_all(&only(b, 5), "K_5(x=a) mod 5", |p| {
        let km = k_mod_p(odd_prime(p)?)?;
        Ok(vec![
            cmp("h_5 = 2ab^2 + 2a^2b", km.h, parse("2*a*b^2 + 2*a^2*b")),
            cmp("K_5(x=a) = h_5 + a^3 + b^3", km.reduced, parse("2*a*b^2 + 2*a^2*b + a^3 + b^3")),
        ])
    })
}

// C-K5ODD

static K5_PARITY: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| {
        let k = k_at(p, pt)?;
        let ab = get(pt, Var::A) + get(pt, Var::B);
        Ok(Some(k.is_odd() == ab.is_odd()))
    },
    observe: observe_k,
    fermat: None,
};

static K5_ALWAYS_ODD: PointClaim = PointClaim {
    vars: &[Var::A, Var::B, Var::X],
    holds: |p, pt| Ok(Some(k_at(p, pt)?.is_odd())),
    observe: observe_k,
    fermat: None,
};

fn run_k5odd(b: &CheckBudget) -> Result<Finding> {
    let exps = only(b, 5);
    let mut f = Finding::new(Domain::sampled(&exps, K5_PARITY.vars, b, "parity of K_5 at positive a, b, x"));
    if exps.is_empty() {
        return Ok(f);
    }
    let k5 = k_poly_cached(5)?;
    let as_function = k5.reduce_function_mod(2)?;
    f.checked += 1;
    if as_function != parse("a + b") {
        f.violated = true;
        f.witness = Some(Witness {
            p: Some(5),
            point: Point::new(),
            observed: Some("K_5 mod 2 as a function".into()),
            difference: Some(&as_function - &parse("a + b")),
        });
    }
    f.notes.push(format!(
        "coefficient-wise K_5 mod 2 = {}, which equals a + b as a function since t^3 = t mod 2",
        k5.reduce_mod(2)?
    ));
    let scans = scan(b, "C-K5ODD", &K5_PARITY, &exps)?;
    absorb(&mut f, &K5_PARITY, &scans, false);
    let literal = scan(b, "C-K5ODD", &K5_ALWAYS_ODD, &exps)?;
    if let Some(s) = literal.first() {
        if let Some(pt) = &s.first {
            f.notes.push(format!(
                "unconditional 'K_5 is odd' fails on {} of {} points, first {}; -a^3 is odd as well as b^3",
                s.violations,
                s.accepted,
                observe_k(5, pt)
            ));
        }
    }
    Ok(f)
}

// C-40

/// The displayed right-hand side at `(y, z, R)`.
fn c40_shown(p: u32, y: &Integer, z: &Integer, r: &Integer) -> Integer {
    let a = z - y;
    let neg_z = -z;
    let mut acc = pow(r, p);
    for i in 1..p {
        let c = binom(p.into(), i.into());
        acc += c * (pow(&a, p - i) * pow(r, i) + pow(&neg_z, p - i) * pow(y, i));
    }
    acc
}

/// Same expansion with the sign of the second group flipped, which is the
/// true identity.
fn c40_corrected(p: u32, y: &Integer, z: &Integer, r: &Integer) -> Integer {
    let a = z - y;
    let neg_z = -z;
    let mut acc = pow(r, p);
    for i in 1..p {
        let c = binom(p.into(), i.into());
        acc += c.clone() * pow(&a, p - i) * pow(r, i) - c * pow(&neg_z, p - i) * pow(y, i);
    }
    acc
}

fn c40_parts(p: u32, pt: &Point) -> (Integer, Integer, Integer) {
    let (x, y, z) = (get(pt, Var::X), get(pt, Var::Y), get(pt, Var::Z));
    let r = x - (z - y);
    let direct = pow(x, p) + pow(y, p) - pow(z, p);
    (direct, c40_shown(p, y, z, &r), c40_corrected(p, y, z, &r))
}

static C40: PointClaim = PointClaim {
    vars: &[Var::X, Var::Y, Var::Z],
    holds: |p, pt| {
        let (direct, shown, _) = c40_parts(p, pt);
        Ok(Some(direct == shown))
    },
    observe: |p, pt| {
        let (direct, shown, _) = c40_parts(p, pt);
        format!("x^p + y^p - z^p = {direct}, displayed expansion = {shown}")
    },
    fermat: Some(fermat_xyz),
};

/// Displayed minus direct, as a polynomial in `y, z, R`.
pub fn c40_difference(p: u32) -> Polynomial {
    let (y, z, r) = (var(Var::Y), var(Var::Z), var(Var::R));
    let a = &z - &y;
    let neg_z = -&z;
    let mut shown = r.pow(p);
    for i in 1..p {
        let c = Polynomial::integer(binom(p.into(), i.into()));
        shown = shown + c * (a.pow(p - i) * r.pow(i) + neg_z.pow(p - i) * y.pow(i));
    }
    let direct = (&a + &r).pow(p) + y.pow(p) - z.pow(p);
    shown - direct
}

fn run_c40(b: &CheckBudget) -> Result<Finding> {
    let exps = sampled_exps(b);
    let mut f = run_points(b, "C-40", &C40, &exps, "positive x, y, z; a = z - y, R = x - a")?;
    if let Some(w) = f.witness.as_mut() {
        w.difference = w.p.map(c40_difference);
    }
    // The sign-corrected expansion must hold everywhere the scan went.
    let mut corrected_bad = 0u64;
    for &p in &exps {
        for pt in grid(C40.vars, b.grid_bound.min(6)) {
            let (direct, _, corrected) = c40_parts(p, &pt);
            corrected_bad += u64::from(direct != corrected);
        }
    }
    if corrected_bad > 0 {
        return Err(Error::Integrity(format!("corrected expansion failed at {corrected_bad} points")));
    }
    if !exps.is_empty() {
        f.notes.push(
            "x^p + y^p - z^p = R^p + sum C(p,i) a^(p-i) R^i - sum C(p,i) (-z)^(p-i) y^i; \
             the displayed form has the wrong sign on the second group"
                .into(),
        );
        f.notes.push("the closing induction on K_p names no variable or step and is not encodable".into());
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CheckBudget {
        CheckBudget { samples: 200, sample_bits: 64, grid_bound: 8, exhaustive_bound: 40, ..Default::default() }
    }

    #[test]
    fn registry_ids_are_unique() {
        let mut ids: Vec<_> = registry().iter().map(|c| c.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
        assert!(n >= 22);
    }

    #[test]
    fn unknown_claim() {
        assert!(matches!(run_claim("C-99", &tiny()), Err(Error::UnknownClaim(_))));
    }

    #[test]
    fn budget_overrides() {
        let mut b = CheckBudget::default();
        b.apply("primes=3,5").unwrap();
        b.apply("samples=10").unwrap();
        b.apply("seed=0x10").unwrap();
        assert_eq!((b.primes.clone(), b.samples, b.seed), (vec![3, 5], 10, 16));
        b.apply("primes=").unwrap();
        assert!(b.primes.is_empty());
        assert!(b.apply("nope=1").is_err());
        b.apply("primes=4").unwrap();
        assert!(b.validate().is_err());
    }

    #[test]
    fn grid_order() {
        let pts: Vec<Point> = grid(&[Var::A, Var::B], 2).collect();
        let flat: Vec<(i32, i32)> = pts
            .iter()
            .map(|p| (i32::try_from(&p[&Var::A]).unwrap(), i32::try_from(&p[&Var::B]).unwrap()))
            .collect();
        assert_eq!(flat, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn c26_display_matches_exactly() {
        for p in [3, 5, 7, 11, 13] {
            let kxa = k_poly_cached(p).unwrap().substitute(Var::X, &var(Var::A));
            assert_eq!(kxa, k_residue_display(p), "p = {p}");
        }
    }

    #[test]
    fn c40_difference_closed_form() {
        // Displayed minus true is twice the second group.
        for p in [3, 5] {
            let (y, z) = (var(Var::Y), var(Var::Z));
            let mut twice = Polynomial::zero();
            for i in 1..p {
                let c = Polynomial::integer(2 * binom(p.into(), i.into()));
                twice = twice + c * (-&z).pow(p - i) * y.pow(i);
            }
            assert_eq!(c40_difference(p), twice);
        }
    }

    #[test]
    fn sampled_claims_are_prefix_stable() {
        let small = tiny();
        let big = CheckBudget { samples: 400, ..tiny() };
        for id in ["C-23P", "C-26N", "C-30"] {
            let a = run_claim(id, &small).unwrap();
            let b = run_claim(id, &big).unwrap();
            assert_eq!(a.outcome, Outcome::Falsified);
            assert_eq!(a.witness, b.witness, "{id}");
        }
    }

    #[test]
    fn store_replays_first() {
        let found = run_claim("C-26N", &tiny()).unwrap();
        let mut store = WitnessStore::default();
        store.record(&found);
        // A budget whose grid cannot reach the witness and has no samples.
        let blind = CheckBudget { grid_bound: 0, samples: 0, ..tiny() };
        assert_eq!(run_claim("C-26N", &blind).unwrap().outcome, Outcome::Vacuous);
        let v = run_claim_with("C-26N", &blind, &store).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);
        assert_eq!(v.witness, found.witness);
    }

    #[test]
    fn witness_round_trips_through_json() {
        let v = run_claim("C-23P", &tiny()).unwrap();
        let w = v.witness.unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains(r#""point":{"x":"3","a":"1","b":"1"}"#), "{text}");
        let back: Witness = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
        assert!(replay_witness("C-23P", &back).unwrap());
    }

    #[test]
    fn exhaustive_refuses_over_budget() {
        let b = CheckBudget { max_points: 10, ..tiny() };
        assert!(matches!(run_claim("C-13", &b), Err(Error::Incomplete(_))));
        let report = run_claims(&["C-13", "C-22"], &b, &mut WitnessStore::default()).unwrap();
        assert_eq!(report.claims[0].outcome, Outcome::Incomplete);
        assert_eq!(report.claims[1].outcome, Outcome::VerifiedInDomain);
    }

    #[test]
    fn symbolic_counts_are_budget_independent() {
        let a = run_claim("C-22", &tiny()).unwrap();
        let b = run_claim("C-22", &CheckBudget::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checked_count, 5);
        let c = run_claim("C-35", &tiny()).unwrap();
        assert_eq!(c.checked_count, 6);
    }
}
