//! One-to-many matching between deadline-class apps and microwave RBs.
//!
//! Plain deferred acceptance does not fit here because an app's RB quota is
//! not fixed up front: how many RBs it needs depends on the realized rate of
//! each RB it already holds. App-side utilities therefore carry an
//! externality — once the bits promised by the currently matched RBs cover
//! the app's remaining need, every further RB is worth zero to it and it
//! stops proposing. The proposal/acceptance loop below converges because no
//! app ever applies to the same RB twice, and its outcome is two-sided
//! stable.

use serde::{Deserialize, Serialize};

use crate::traffic::UaId;

/// One slot-t matching problem: the deadline-class apps, their realized
/// per-RB rates, and the bits each app still needs.
#[derive(Debug, Clone)]
pub struct MatchingInstance {
    /// Participating apps in ascending id order (used for tie-breaking).
    pub ua_ids: Vec<UaId>,
    /// `rates[a][k]`: achievable rate of participant `a` on RB `k`, bits/s.
    pub rates: Vec<Vec<f64>>,
    /// Bits still owed to each participant; strictly positive.
    pub remaining_bits: Vec<f64>,
    /// Slot duration in seconds; converts a rate into promised bits.
    pub slot_duration_s: f64,
}

impl MatchingInstance {
    pub fn new(
        ua_ids: Vec<UaId>,
        rates: Vec<Vec<f64>>,
        remaining_bits: Vec<f64>,
        slot_duration_s: f64,
    ) -> Self {
        assert_eq!(ua_ids.len(), rates.len());
        assert_eq!(ua_ids.len(), remaining_bits.len());
        debug_assert!(
            ua_ids.windows(2).all(|w| w[0] < w[1]),
            "participants must be sorted"
        );
        debug_assert!(rates.iter().flatten().all(|r| r.is_finite() && *r >= 0.0));
        debug_assert!(remaining_bits.iter().all(|b| *b > 0.0));
        Self {
            ua_ids,
            rates,
            remaining_bits,
            slot_duration_s,
        }
    }

    pub fn participant_count(&self) -> usize {
        self.ua_ids.len()
    }

    pub fn rb_count(&self) -> usize {
        self.rates.first().map_or(0, Vec::len)
    }

    /// Bits RB `k` would deliver to participant `a` over the slot.
    pub fn promised_bits(&self, a: usize, k: usize) -> f64 {
        self.rates[a][k] * self.slot_duration_s
    }
}

/// A slot-t assignment of RBs to participants, plus loop effort counters.
///
/// `rb_to_ua` and `ua_to_rbs` are kept mutually consistent:
/// `rb_to_ua[k] == Some(a)` iff `k ∈ ua_to_rbs[a]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub rb_to_ua: Vec<Option<usize>>,
    pub ua_to_rbs: Vec<Vec<usize>>,
    /// Proposal rounds until convergence (the headline iteration count).
    pub rounds: usize,
    /// Individual proposals issued; bounded by participants × RBs.
    pub proposals: usize,
}

impl Matching {
    pub fn empty(participants: usize, rbs: usize) -> Self {
        Self {
            rb_to_ua: vec![None; rbs],
            ua_to_rbs: vec![Vec::new(); participants],
            rounds: 0,
            proposals: 0,
        }
    }

    /// Bits currently promised to participant `a` by its matched RBs.
    pub fn allocated_bits(&self, inst: &MatchingInstance, a: usize) -> f64 {
        self.ua_to_rbs[a]
            .iter()
            .map(|&k| inst.promised_bits(a, k))
            .sum()
    }

    /// Sorted `(app id, RB)` pairs for serialization and golden traces.
    pub fn to_report(&self, inst: &MatchingInstance) -> MatchingReport {
        let mut pairs: Vec<(UaId, usize)> = self
            .rb_to_ua
            .iter()
            .enumerate()
            .filter_map(|(k, a)| a.map(|a| (inst.ua_ids[a], k)))
            .collect();
        pairs.sort();
        MatchingReport {
            participants: inst.participant_count(),
            pairs,
            rounds: self.rounds,
            proposals: self.proposals,
        }
    }
}

/// Serializable summary of a converged matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingReport {
    /// Apps that took part in the slot's matching game.
    pub participants: usize,
    pub pairs: Vec<(UaId, usize)>,
    pub rounds: usize,
    pub proposals: usize,
}

/// App-side utility of one more RB under the current matching state.
///
/// Zero when the app is outside the deadline class, or when the RBs it
/// already holds promise strictly more than its remaining bits; otherwise
/// the RB's rate.
pub fn ua_utility(
    rate: f64,
    allocated_bits: f64,
    remaining_bits: f64,
    in_deadline_class: bool,
) -> f64 {
    if !in_deadline_class || allocated_bits > remaining_bits {
        0.0
    } else {
        rate
    }
}

/// RB-side utility of an applicant: simply its rate.
pub fn rb_utility(rate: f64) -> f64 {
    rate
}

/// Rate-sorted preference orders for both sides.
///
/// App orderings sort RBs by descending rate, ties broken by ascending RB
/// index; RB orderings sort participants by descending rate, ties broken by
/// ascending app id. Within a slot only the app-side stop condition is
/// dynamic, so the orderings themselves are computed once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceState {
    /// `ua_order[a]`: RB indices, most preferred first.
    pub ua_order: Vec<Vec<usize>>,
    /// `rb_order[k]`: participant indices, most preferred first.
    pub rb_order: Vec<Vec<usize>>,
}

pub fn build_preferences(inst: &MatchingInstance) -> PreferenceState {
    let n = inst.participant_count();
    let k2 = inst.rb_count();
    let ua_order = (0..n)
        .map(|a| {
            let mut order: Vec<usize> = (0..k2).collect();
            order.sort_by(|&x, &y| {
                inst.rates[a][y]
                    .partial_cmp(&inst.rates[a][x])
                    .unwrap()
                    .then(x.cmp(&y))
            });
            order
        })
        .collect();
    let rb_order = (0..k2)
        .map(|k| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| {
                inst.rates[y][k]
                    .partial_cmp(&inst.rates[x][k])
                    .unwrap()
                    .then(inst.ua_ids[x].cmp(&inst.ua_ids[y]))
            });
            order
        })
        .collect();
    PreferenceState { ua_order, rb_order }
}

/// Run the proposal/acceptance loop for one slot.
///
/// Per round, every app that still needs bits and has RBs left to try
/// applies to its most preferred untried RB; each RB keeps the best
/// applicant among newcomers and its incumbent (incumbent wins ties, then
/// lower app id). Displaced apps resume proposing from where they stopped.
/// The loop ends when every app is covered or has exhausted its candidates.
pub fn run_matching(inst: &MatchingInstance) -> Matching {
    let n = inst.participant_count();
    let k2 = inst.rb_count();
    let mut m = Matching::empty(n, k2);
    if n == 0 || k2 == 0 {
        return m;
    }

    let prefs = build_preferences(inst);
    // Candidate set of each app: the not-yet-proposed suffix of its order.
    let mut next_choice = vec![0usize; n];
    let mut applicants: Vec<Vec<usize>> = vec![Vec::new(); k2];

    loop {
        let mut proposed_any = false;
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            if next_choice[a] >= k2 {
                continue; // exhausted candidates
            }
            if m.allocated_bits(inst, a) >= inst.remaining_bits[a] {
                continue; // covered; stops proposing until displaced
            }
            let k = prefs.ua_order[a][next_choice[a]];
            next_choice[a] += 1;
            applicants[k].push(a); // ascending a, hence ascending app id
            m.proposals += 1;
            proposed_any = true;
        }
        if !proposed_any {
            break;
        }
        m.rounds += 1;

        for (k, apps) in applicants.iter_mut().enumerate() {
            if apps.is_empty() {
                continue;
            }
            // Strict improvement only: incumbent survives ties, and among
            // equal newcomers the first (lowest id) wins.
            let mut best = m.rb_to_ua[k];
            for &a in apps.iter() {
                match best {
                    None => best = Some(a),
                    Some(b) => {
                        if inst.rates[a][k] > inst.rates[b][k] {
                            best = Some(a);
                        }
                    }
                }
            }
            if best != m.rb_to_ua[k] {
                let winner = best.expect("nonempty applicant pool");
                if let Some(old) = m.rb_to_ua[k] {
                    debug_assert!(
                        inst.rates[winner][k] > inst.rates[old][k],
                        "an RB may only trade up"
                    );
                    m.ua_to_rbs[old].retain(|&held| held != k);
                }
                m.rb_to_ua[k] = Some(winner);
                m.ua_to_rbs[winner].push(k);
            }
            apps.clear();
        }
    }

    // Convergence bound: no app applies to the same RB twice.
    assert!(m.proposals <= n * k2, "proposal bound exceeded");
    // Exit condition of the loop, literally.
    #[allow(clippy::needless_range_loop)]
    for a in 0..n {
        assert!(
            m.allocated_bits(inst, a) >= inst.remaining_bits[a] || next_choice[a] >= k2,
            "loop exited with an uncovered app that still had candidates"
        );
    }
    debug_assert!(consistent(&m));
    m
}

/// Exhaustively list the blocking pairs of a matching.
///
/// `(a, k)` with `k ∉ µ(a)` blocks when both sides would deviate: the app
/// either still needs bits (so one more positive-rate RB has positive
/// utility) or holds a strictly worse RB it would swap out; and the RB is
/// idle or holds a strictly worse app. Empty iff the matching is two-sided
/// stable.
pub fn find_blocking_pairs(inst: &MatchingInstance, m: &Matching) -> Vec<(usize, usize)> {
    let n = inst.participant_count();
    let k2 = inst.rb_count();
    let mut blocking = Vec::new();
    for a in 0..n {
        let allocated = m.allocated_bits(inst, a);
        let needs_more = allocated < inst.remaining_bits[a];
        for k in 0..k2 {
            if m.rb_to_ua[k] == Some(a) {
                continue;
            }
            let rate = inst.rates[a][k];
            if rate <= 0.0 {
                continue; // zero utility either way
            }
            let ua_wants = needs_more
                || m.ua_to_rbs[a]
                    .iter()
                    .any(|&held| inst.rates[a][held] < rate);
            if !ua_wants {
                continue;
            }
            let rb_wants = match m.rb_to_ua[k] {
                None => true,
                Some(b) => inst.rates[b][k] < rate,
            };
            if rb_wants {
                blocking.push((a, k));
            }
        }
    }
    blocking
}

/// Whether every held RB is still strictly needed: dropping any single RB
/// from `µ(a)` must leave the app short of its remaining bits. This is the
/// saturation semantics the proposal loop enforces — an app never ends up
/// holding an RB that was worthless to it when accepted.
pub fn respects_saturation(inst: &MatchingInstance, m: &Matching) -> bool {
    (0..inst.participant_count()).all(|a| {
        let allocated = m.allocated_bits(inst, a);
        m.ua_to_rbs[a]
            .iter()
            .all(|&k| allocated - inst.promised_bits(a, k) < inst.remaining_bits[a])
    })
}

/// Definition-2 consistency of the two matching maps.
pub fn consistent(m: &Matching) -> bool {
    let forward = m
        .rb_to_ua
        .iter()
        .enumerate()
        .all(|(k, a)| a.is_none_or(|a| m.ua_to_rbs[a].contains(&k)));
    let backward = m
        .ua_to_rbs
        .iter()
        .enumerate()
        .all(|(a, rbs)| rbs.iter().all(|&k| m.rb_to_ua[k] == Some(a)));
    let mut seen = vec![false; m.rb_to_ua.len()];
    let no_dup = m
        .ua_to_rbs
        .iter()
        .flatten()
        .all(|&k| !std::mem::replace(&mut seen[k], true));
    forward && backward && no_dup
}
