//! Symbolic plan construction for the capacity-achieving scheme.
//!
//! A plan fixes, for one (K, N, desired index), the full query structure
//! before any randomization: which equations each database is asked, and
//! which pure side-information equation cancels each mixed equation. The
//! construction grows block by block: block `k` holds every equation whose
//! terms span exactly `k` distinct messages, `(N-1)^{k-1}` copies of each
//! k-subset signature per database. Each mixed equation (one containing the
//! desired slot, block ≥ 2) pairs one fresh desired bit with a pure
//! combination downloaded from a different database in the previous block.
//!
//! Enumeration order is fixed so plans are reproducible: pure equations by
//! lexicographic signature, then database, drawing fresh serials per message
//! in that order; mixed equations per database by lexicographic signature,
//! then source database ascending (skipping the host), then source position,
//! each paired with the next fresh desired serial.

use std::collections::BTreeMap;

use num_integer::binomial;
use thiserror::Error;

use crate::model::SchemeParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("desired index {desired} out of range for {messages} messages")]
    DesiredOutOfRange { desired: usize, messages: usize },
    #[error("plan does not fit in memory for these parameters")]
    TooLarge,
}

/// Which message a symbolic bit belongs to, relative to the desired index:
/// the desired message, or the r-th remaining message in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Desired,
    Undesired(usize),
}

impl Slot {
    /// Table letter: `a` for the desired slot, `b`, `c`, … for undesired
    /// slots in rank order.
    pub fn letter(self) -> char {
        match self {
            Slot::Desired => 'a',
            Slot::Undesired(rank) => (b'b' + rank as u8) as char,
        }
    }
}

/// One fresh symbolic bit: a slot plus a 1-based serial within that slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicBit {
    pub slot: Slot,
    pub serial: u32,
}

/// Sum of symbolic bits, at most one per slot, kept sorted by slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicEquation {
    terms: Vec<SymbolicBit>,
}

impl SymbolicEquation {
    fn new(mut terms: Vec<SymbolicBit>) -> Self {
        terms.sort_unstable();
        Self { terms }
    }

    pub(crate) fn from_terms(terms: Vec<SymbolicBit>) -> Self {
        Self::new(terms)
    }

    pub fn terms(&self) -> &[SymbolicBit] {
        &self.terms
    }

    pub fn contains_desired(&self) -> bool {
        self.terms.iter().any(|t| t.slot == Slot::Desired)
    }

    /// The desired-slot serial, if present.
    pub fn desired_serial(&self) -> Option<u32> {
        self.terms
            .iter()
            .find(|t| t.slot == Slot::Desired)
            .map(|t| t.serial)
    }

    /// Terms excluding the desired slot.
    pub fn undesired_terms(&self) -> Vec<SymbolicBit> {
        self.terms
            .iter()
            .filter(|t| t.slot != Slot::Desired)
            .copied()
            .collect()
    }

    /// Sorted slots appearing in this equation.
    pub fn slots(&self) -> Vec<Slot> {
        self.terms.iter().map(|t| t.slot).collect()
    }

    /// Render in table form, e.g. `a4+b2`.
    pub fn render(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{}{}", t.slot.letter(), t.serial))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Location of one equation inside a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EquationRef {
    pub database: usize,
    pub position: usize,
}

/// The full symbolic query structure for one (K, N, desired index).
#[derive(Debug, Clone)]
pub struct SchemePlan {
    params: SchemeParams,
    desired: usize,
    message_len: usize,
    per_database: Vec<Vec<SymbolicEquation>>,
    routing: BTreeMap<EquationRef, EquationRef>,
    bit_budget: Vec<u64>,
}

impl SchemePlan {
    pub(crate) fn from_parts(
        params: SchemeParams,
        desired: usize,
        message_len: usize,
        per_database: Vec<Vec<SymbolicEquation>>,
        routing: BTreeMap<EquationRef, EquationRef>,
        bit_budget: Vec<u64>,
    ) -> Self {
        Self {
            params,
            desired,
            message_len,
            per_database,
            routing,
            bit_budget,
        }
    }

    pub fn params(&self) -> SchemeParams {
        self.params
    }

    /// 0-based desired message index.
    pub fn desired(&self) -> usize {
        self.desired
    }

    /// Bits per message this plan retrieves and permutes over.
    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn per_database(&self) -> &[Vec<SymbolicEquation>] {
        &self.per_database
    }

    pub fn equations(&self, database: usize) -> &[SymbolicEquation] {
        &self.per_database[database]
    }

    /// Mixed equation location -> the pure side-information equation whose
    /// answer cancels its undesired part.
    pub fn routing(&self) -> &BTreeMap<EquationRef, EquationRef> {
        &self.routing
    }

    /// Fresh symbolic bits drawn per message, indexed by message.
    pub fn bit_budget(&self) -> &[u64] {
        &self.bit_budget
    }

    pub fn total_equations(&self) -> u64 {
        self.per_database.iter().map(|db| db.len() as u64).sum()
    }

    pub fn desired_bit_count(&self) -> u64 {
        self.bit_budget[self.desired]
    }

    /// Concrete message for a slot: the desired slot maps to the desired
    /// index, undesired rank r to the r-th remaining message ascending.
    pub fn slot_message(&self, slot: Slot) -> usize {
        match slot {
            Slot::Desired => self.desired,
            Slot::Undesired(rank) => {
                if rank < self.desired {
                    rank
                } else {
                    rank + 1
                }
            }
        }
    }

    /// Per-database per-block-size census: for each k, the number of
    /// equations spanning exactly k slots and how many of those contain the
    /// desired slot.
    pub fn census(&self, database: usize) -> BTreeMap<usize, (u64, u64)> {
        let mut counts: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
        for eq in &self.per_database[database] {
            let entry = counts.entry(eq.terms().len()).or_default();
            entry.0 += 1;
            if eq.contains_desired() {
                entry.1 += 1;
            }
        }
        counts
    }

    /// Verify every structural invariant of a capacity plan. Returns a
    /// diagnostic description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let k_total = self.params.messages;
        let n_dbs = self.params.databases;

        // Per-block equation counts per database.
        for db in 0..n_dbs {
            let census = self.census(db);
            let mut total = 0u64;
            for k in 1..=k_total {
                let copies = pow_u64(n_dbs as u64 - 1, k as u32 - 1);
                let expect_total = copies * binomial(k_total as u64, k as u64);
                let expect_desired = copies * binomial(k_total as u64 - 1, k as u64 - 1);
                let (got_total, got_desired) = census.get(&k).copied().unwrap_or((0, 0));
                if got_total != expect_total {
                    return Err(format!(
                        "db {db}: block {k} has {got_total} equations, expected {expect_total}"
                    ));
                }
                if got_desired != expect_desired {
                    return Err(format!(
                        "db {db}: block {k} has {got_desired} desired equations, expected {expect_desired}"
                    ));
                }
                total += got_total;
            }
            if total != self.per_database[db].len() as u64 {
                return Err(format!("db {db}: census does not cover every equation"));
            }
        }

        // Every symbolic bit appears exactly once per database.
        for (db, equations) in self.per_database.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for eq in equations {
                for term in eq.terms() {
                    if !seen.insert(*term) {
                        return Err(format!(
                            "db {db}: symbolic bit {}{} appears twice",
                            term.slot.letter(),
                            term.serial
                        ));
                    }
                }
            }
        }

        // Routing covers exactly the mixed equations and cancels term for term.
        let mut uses_per_source: BTreeMap<EquationRef, Vec<usize>> = BTreeMap::new();
        for (db, equations) in self.per_database.iter().enumerate() {
            for (position, eq) in equations.iter().enumerate() {
                let here = EquationRef {
                    database: db,
                    position,
                };
                let is_mixed = eq.contains_desired() && eq.terms().len() >= 2;
                match self.routing.get(&here) {
                    None if is_mixed => {
                        return Err(format!("mixed equation at db {db} pos {position} unrouted"))
                    }
                    Some(_) if !is_mixed => {
                        return Err(format!(
                            "non-mixed equation at db {db} pos {position} has routing"
                        ))
                    }
                    Some(source) => {
                        if source.database == db {
                            return Err(format!(
                                "routing source for db {db} pos {position} is the same database"
                            ));
                        }
                        let source_eq = &self.per_database[source.database][source.position];
                        if source_eq.contains_desired() {
                            return Err(format!(
                                "routing source for db {db} pos {position} is not pure"
                            ));
                        }
                        if source_eq.terms() != eq.undesired_terms().as_slice() {
                            return Err(format!(
                                "routing source for db {db} pos {position} does not cancel it"
                            ));
                        }
                        uses_per_source.entry(*source).or_default().push(db);
                    }
                    None => {}
                }
            }
        }

        // Each pure equation serves exactly one mixed equation at each of the
        // other N-1 databases.
        for (db, equations) in self.per_database.iter().enumerate() {
            for (position, eq) in equations.iter().enumerate() {
                if eq.contains_desired() {
                    continue;
                }
                let source = EquationRef {
                    database: db,
                    position,
                };
                let mut users = uses_per_source.remove(&source).unwrap_or_default();
                users.sort_unstable();
                let expected: Vec<usize> = (0..n_dbs).filter(|&d| d != db).collect();
                if users != expected {
                    return Err(format!(
                        "pure equation at db {db} pos {position} used by databases {users:?}, expected {expected:?}"
                    ));
                }
            }
        }

        // Bit budgets and totals.
        if self.bit_budget[self.desired] != self.message_len as u64 {
            return Err(format!(
                "desired bit budget {} differs from message length {}",
                self.bit_budget[self.desired], self.message_len
            ));
        }
        let expected_total: u64 = (1..=k_total)
            .map(|k| {
                pow_u64(n_dbs as u64 - 1, k as u32 - 1) * binomial(k_total as u64, k as u64)
            })
            .sum::<u64>()
            * n_dbs as u64;
        if self.total_equations() != expected_total {
            return Err(format!(
                "total equations {} differ from expected {expected_total}",
                self.total_equations()
            ));
        }
        Ok(())
    }
}

fn pow_u64(base: u64, exp: u32) -> u64 {
    base.pow(exp)
}

/// All k-element subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for value in start..n {
            current.push(value);
            recurse(value + 1, n, k, current, out);
            current.pop();
        }
    }
    recurse(0, n, k, &mut current, &mut out);
    out
}

/// Deterministic symbolic plan for retrieving message `desired` (0-based).
pub fn build_plan(params: SchemeParams, desired: usize) -> Result<SchemePlan, PlanError> {
    if desired >= params.messages {
        return Err(PlanError::DesiredOutOfRange {
            desired,
            messages: params.messages,
        });
    }
    let message_len = params.scheme_message_len().ok_or(PlanError::TooLarge)?;
    let k_total = params.messages;
    let n_dbs = params.databases;
    let undesired_count = k_total - 1;

    let mut per_database: Vec<Vec<SymbolicEquation>> = vec![Vec::new(); n_dbs];
    let mut routing: BTreeMap<EquationRef, EquationRef> = BTreeMap::new();
    let mut desired_serial = 0u32;
    let mut undesired_serials = vec![0u32; undesired_count];
    let mut next_desired = move || {
        desired_serial += 1;
        desired_serial
    };
    // Pure equations of the previous block, keyed by (signature, database),
    // each entry listing plan positions in generation order.
    let mut prev_pure: BTreeMap<(Vec<usize>, usize), Vec<usize>> = BTreeMap::new();

    let mut budget_desired = 0u64;
    for block in 1..=k_total {
        // Mixed equations: a fresh desired bit, alone in block 1, otherwise
        // added to a pure combination downloaded elsewhere in block - 1.
        for db in 0..n_dbs {
            if block == 1 {
                let serial = next_desired();
                budget_desired += 1;
                per_database[db].push(SymbolicEquation::new(vec![SymbolicBit {
                    slot: Slot::Desired,
                    serial,
                }]));
                continue;
            }
            for signature in subsets(undesired_count, block - 1) {
                for source_db in (0..n_dbs).filter(|&d| d != db) {
                    let sources = prev_pure
                        .get(&(signature.clone(), source_db))
                        .cloned()
                        .unwrap_or_default();
                    for source_position in sources {
                        let serial = next_desired();
                        budget_desired += 1;
                        let mut terms =
                            per_database[source_db][source_position].terms().to_vec();
                        terms.push(SymbolicBit {
                            slot: Slot::Desired,
                            serial,
                        });
                        let position = per_database[db].len();
                        per_database[db].push(SymbolicEquation::new(terms));
                        routing.insert(
                            EquationRef {
                                database: db,
                                position,
                            },
                            EquationRef {
                                database: source_db,
                                position: source_position,
                            },
                        );
                    }
                }
            }
        }

        // Pure equations of this block: one fresh bit from each message of a
        // block-sized undesired signature, (N-1)^{block-1} copies per
        // database.
        let mut new_pure: BTreeMap<(Vec<usize>, usize), Vec<usize>> = BTreeMap::new();
        let copies = pow_u64(n_dbs as u64 - 1, block as u32 - 1) as usize;
        for signature in subsets(undesired_count, block) {
            for db in 0..n_dbs {
                for _ in 0..copies {
                    let terms = signature
                        .iter()
                        .map(|&rank| {
                            undesired_serials[rank] += 1;
                            SymbolicBit {
                                slot: Slot::Undesired(rank),
                                serial: undesired_serials[rank],
                            }
                        })
                        .collect();
                    let position = per_database[db].len();
                    per_database[db].push(SymbolicEquation::new(terms));
                    new_pure
                        .entry((signature.clone(), db))
                        .or_default()
                        .push(position);
                }
            }
        }
        prev_pure = new_pure;
    }

    let mut bit_budget = vec![0u64; k_total];
    bit_budget[desired] = budget_desired;
    for (rank, &count) in undesired_serials.iter().enumerate() {
        let message = if rank < desired { rank } else { rank + 1 };
        bit_budget[message] = count as u64;
    }

    Ok(SchemePlan::from_parts(
        params,
        desired,
        message_len,
        per_database,
        routing,
        bit_budget,
    ))
}
