//! Per-slot orchestration of both bands over the whole horizon.
//!
//! At slot `t` the deadline class enters the microwave matching over the
//! `K2` RBs while pending apps of later classes with LoS UEs each receive
//! one mmWave TDMA sub-slot of length `tau2 / J(t)`, handed out round-robin.
//! mmWave rates are only realized at transmission time — the round-robin
//! branch never inspects them. The CSI-only baseline reuses the same engine
//! but treats every app of a UE as having the UE's most stringent delay.

use serde::{Deserialize, Serialize};

use crate::channel::{Band, BandParams, ChannelDraws, ChannelError};
use crate::matching::{run_matching, MatchingInstance, MatchingReport};
use crate::traffic::{Ledger, Scenario, UaId, UaState, UaStatus};

/// Which scheduling policy drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    /// Per-app delay classes drive both branches.
    ContextAware,
    /// Every app inherits its UE's minimum delay class.
    CsiBaseline,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::ContextAware => "context",
            PolicyKind::CsiBaseline => "csi",
        }
    }
}

/// One realized transmission: an app served on one band for some duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub ua: UaId,
    /// Achievable rate during the transmission, bits/s.
    pub rate_bps: f64,
    /// Transmission duration in seconds.
    pub duration_s: f64,
    /// Bits credited to the ledger (offered bits truncated at the
    /// remaining need).
    pub bits_delivered: f64,
}

impl Delivery {
    pub fn offered_bits(&self) -> f64 {
        self.rate_bps * self.duration_s
    }
}

/// Everything decided and delivered in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    /// 1-based slot index.
    pub slot: usize,
    /// Converged microwave matching as sorted (app, RB) pairs.
    pub muw_matching: MatchingReport,
    pub muw_deliveries: Vec<Delivery>,
    /// Apps holding mmWave sub-slots j = 1..J(t), in service order.
    pub mmw_order: Vec<UaId>,
    /// Sub-slot length `tau2 / J(t)`; zero when J(t) = 0.
    pub mmw_slot_duration_s: f64,
    pub mmw_deliveries: Vec<Delivery>,
}

impl SlotDecision {
    pub fn muw_bits(&self) -> f64 {
        // `+ 0.0` normalizes the empty sum's negative zero.
        self.muw_deliveries
            .iter()
            .map(|d| d.bits_delivered)
            .sum::<f64>()
            + 0.0
    }

    pub fn mmw_bits(&self) -> f64 {
        self.mmw_deliveries
            .iter()
            .map(|d| d.bits_delivered)
            .sum::<f64>()
            + 0.0
    }
}

/// Full record of one policy run: every decision, every delivery, and the
/// final per-app ledger. All metrics are recomputable from this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrace {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub slot_duration_s: f64,
    /// Number of microwave RBs the run was scheduled over.
    pub muw_rb_count: usize,
    pub slots: Vec<SlotDecision>,
    pub final_states: Vec<UaState>,
}

impl PolicyTrace {
    /// CSV rendering: one row per delivery plus the slot's iteration count.
    /// Columns: `slot,band,ua,rate_bps,duration_s,bits,rounds,proposals`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,band,ua,rate_bps,duration_s,bits,rounds,proposals\n");
        for slot in &self.slots {
            for d in &slot.muw_deliveries {
                out.push_str(&format!(
                    "{},muw,{},{},{},{},{},{}\n",
                    slot.slot,
                    d.ua.0,
                    d.rate_bps,
                    d.duration_s,
                    d.bits_delivered,
                    slot.muw_matching.rounds,
                    slot.muw_matching.proposals,
                ));
            }
            for d in &slot.mmw_deliveries {
                out.push_str(&format!(
                    "{},mmw,{},{},{},{},{},{}\n",
                    slot.slot,
                    d.ua.0,
                    d.rate_bps,
                    d.duration_s,
                    d.bits_delivered,
                    slot.muw_matching.rounds,
                    slot.muw_matching.proposals,
                ));
            }
        }
        out
    }
}

/// Round-robin service cursor over the app id space; persists across slots
/// so the head of the service order rotates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrCursor {
    next: usize,
}

impl RrCursor {
    pub fn new() -> Self {
        Self { next: 0 }
    }
}

impl Default for RrCursor {
    fn default() -> Self {
        Self::new()
    }
}

/// Rotate the requesters (given in ascending id order) so service starts at
/// the cursor, then advance the cursor past the first app served.
///
/// Empty requests leave the cursor untouched.
pub fn mmw_round_robin(requests: &[UaId], cursor: &mut RrCursor) -> Vec<UaId> {
    debug_assert!(requests.windows(2).all(|w| w[0] < w[1]));
    if requests.is_empty() {
        return Vec::new();
    }
    let split = requests
        .iter()
        .position(|a| a.0 >= cursor.next)
        .unwrap_or(0);
    let mut order = Vec::with_capacity(requests.len());
    order.extend_from_slice(&requests[split..]);
    order.extend_from_slice(&requests[..split]);
    cursor.next = order[0].0 + 1;
    order
}

fn effective_classes(scenario: &Scenario, policy: PolicyKind) -> Vec<usize> {
    match policy {
        PolicyKind::ContextAware => scenario.apps.iter().map(|a| a.qos_class).collect(),
        PolicyKind::CsiBaseline => {
            let min_class = scenario.min_class_per_ue();
            scenario.apps.iter().map(|a| min_class[a.ue.0]).collect()
        }
    }
}

/// Schedule one slot under per-app (context-aware) delay classes.
pub fn schedule_slot(
    slot: usize,
    scenario: &Scenario,
    bands: &BandParams,
    draws: &ChannelDraws,
    ledger: &mut Ledger,
    cursor: &mut RrCursor,
) -> SlotDecision {
    let classes = effective_classes(scenario, PolicyKind::ContextAware);
    schedule_slot_with_classes(slot, scenario, bands, draws, ledger, cursor, &classes)
}

/// Schedule one slot under the CSI-only baseline: identical machinery, but
/// every app carries its UE's minimum delay class, so preferences reduce to
/// rates on both sides.
pub fn csi_baseline_schedule(
    slot: usize,
    scenario: &Scenario,
    bands: &BandParams,
    draws: &ChannelDraws,
    ledger: &mut Ledger,
    cursor: &mut RrCursor,
) -> SlotDecision {
    let classes = effective_classes(scenario, PolicyKind::CsiBaseline);
    schedule_slot_with_classes(slot, scenario, bands, draws, ledger, cursor, &classes)
}

fn schedule_slot_with_classes(
    slot: usize,
    scenario: &Scenario,
    bands: &BandParams,
    draws: &ChannelDraws,
    ledger: &mut Ledger,
    cursor: &mut RrCursor,
    classes: &[usize],
) -> SlotDecision {
    let tau2 = scenario.slot_duration_s;

    // Deadline branch: pending apps whose (effective) class is this slot.
    let deadline_apps: Vec<UaId> = scenario
        .apps
        .iter()
        .filter(|a| classes[a.id.0] == slot && ledger.is_pending(a.id))
        .map(|a| a.id)
        .collect();

    let rates: Vec<Vec<f64>> = deadline_apps
        .iter()
        .map(|&a| {
            let ue = scenario.app(a).ue.0;
            (0..bands.muw.rb_count)
                .map(|k| draws.muw_rate(bands, ue, slot, k))
                .collect()
        })
        .collect();
    let remaining: Vec<f64> = deadline_apps
        .iter()
        .map(|&a| ledger.remaining_bits(a))
        .collect();
    let instance = MatchingInstance::new(deadline_apps.clone(), rates, remaining, tau2);
    let muw_matching = run_matching(&instance);

    let mut muw_deliveries = Vec::new();
    for (idx, &ua) in deadline_apps.iter().enumerate() {
        let rbs = &muw_matching.ua_to_rbs[idx];
        if rbs.is_empty() {
            continue;
        }
        let rate: f64 = rbs.iter().map(|&k| instance.rates[idx][k]).sum();
        let offered = rate * tau2;
        let delivered = ledger.record_transmission(ua, offered, Band::MicroWave);
        muw_deliveries.push(Delivery {
            ua,
            rate_bps: rate,
            duration_s: tau2,
            bits_delivered: delivered,
        });
    }

    // mmWave branch: pending later-deadline apps of LoS UEs, one TDMA
    // sub-slot each. Rates are unknown until transmission.
    let requests: Vec<UaId> = scenario
        .apps
        .iter()
        .filter(|a| classes[a.id.0] > slot && ledger.is_pending(a.id) && scenario.ue_of(a.id).los)
        .map(|a| a.id)
        .collect();
    let mmw_order = mmw_round_robin(&requests, cursor);
    let j_count = mmw_order.len();
    let tau1 = if j_count > 0 {
        tau2 / j_count as f64
    } else {
        0.0
    };

    let mut mmw_deliveries = Vec::with_capacity(j_count);
    for (j, &ua) in mmw_order.iter().enumerate() {
        let ue = scenario.app(ua).ue.0;
        let rate = draws.mmw_slot_rate(bands, ue, slot, j);
        let offered = rate * tau1;
        let delivered = ledger.record_transmission(ua, offered, Band::MmWave);
        mmw_deliveries.push(Delivery {
            ua,
            rate_bps: rate,
            duration_s: tau1,
            bits_delivered: delivered,
        });
    }

    let decision = SlotDecision {
        slot,
        muw_matching: muw_matching.to_report(&instance),
        muw_deliveries,
        mmw_order,
        mmw_slot_duration_s: tau1,
        mmw_deliveries,
    };
    assert_slot_constraints(scenario, bands, &decision);
    decision
}

/// Run one policy over the whole horizon. Deterministic in
/// `(scenario, channel_seed)`; both policies given the same pair see
/// identical channels.
pub fn run_policy(
    scenario: &Scenario,
    bands: &BandParams,
    policy: PolicyKind,
    channel_seed: u64,
) -> Result<PolicyTrace, ChannelError> {
    let positions: Vec<_> = scenario.ues.iter().map(|ue| ue.position).collect();
    let draws = ChannelDraws::new(&positions, bands, scenario.class_count, channel_seed)?;
    Ok(run_policy_with_draws(scenario, bands, policy, &draws))
}

/// As [`run_policy`] but with externally prepared channel draws, so several
/// policies can share one realization explicitly.
pub fn run_policy_with_draws(
    scenario: &Scenario,
    bands: &BandParams,
    policy: PolicyKind,
    draws: &ChannelDraws,
) -> PolicyTrace {
    let classes = effective_classes(scenario, policy);
    let mut ledger = Ledger::new(scenario);
    let mut cursor = RrCursor::new();
    let mut slots = Vec::with_capacity(scenario.class_count);

    for t in 1..=scenario.class_count {
        let decision = schedule_slot_with_classes(
            t,
            scenario,
            bands,
            draws,
            &mut ledger,
            &mut cursor,
            &classes,
        );
        slots.push(decision);
        // True-class deadlines drive expiry regardless of policy.
        ledger.expire_class(scenario, t);
    }

    let trace = PolicyTrace {
        policy,
        horizon: scenario.class_count,
        slot_duration_s: scenario.slot_duration_s,
        muw_rb_count: bands.muw.rb_count,
        slots,
        final_states: ledger.states().to_vec(),
    };
    validate_trace(scenario, &trace).expect("internal constraint violation");
    trace
}

fn assert_slot_constraints(scenario: &Scenario, bands: &BandParams, d: &SlotDecision) {
    // Orthogonal mmWave sub-slots: each app holds at most one.
    let mut seen = std::collections::HashSet::new();
    for ua in &d.mmw_order {
        assert!(seen.insert(*ua), "app {:?} holds two mmWave sub-slots", ua);
    }
    // No app on both bands within one slot.
    for (ua, _) in &d.muw_matching.pairs {
        assert!(
            !seen.contains(ua),
            "app {:?} scheduled on both bands in slot {}",
            ua,
            d.slot
        );
    }
    // RB orthogonality and per-app RB quota.
    let mut rb_seen = std::collections::HashSet::new();
    let mut per_ua = std::collections::HashMap::new();
    for (ua, rb) in &d.muw_matching.pairs {
        assert!(*rb < bands.muw.rb_count);
        assert!(
            rb_seen.insert(*rb),
            "RB {} assigned twice in slot {}",
            rb,
            d.slot
        );
        *per_ua.entry(*ua).or_insert(0usize) += 1;
    }
    for (_, count) in per_ua {
        assert!(count <= bands.muw.rb_count);
    }
    // Sub-slot durations tile the slot exactly.
    if !d.mmw_order.is_empty() {
        let total = d.mmw_slot_duration_s * d.mmw_order.len() as f64;
        assert!(
            (total - scenario.slot_duration_s).abs() <= 1e-9 * scenario.slot_duration_s,
            "mmWave sub-slots do not tile the slot"
        );
    }
    // Deliveries carry rate x duration before truncation.
    for del in d.muw_deliveries.iter().chain(&d.mmw_deliveries) {
        assert!(del.bits_delivered <= del.offered_bits() + 1e-9 * del.offered_bits().max(1.0));
    }
}

/// Re-check a finished trace against every model constraint, replaying the
/// deliveries through a fresh ledger. Both policies must pass the identical
/// suite.
pub fn validate_trace(scenario: &Scenario, trace: &PolicyTrace) -> Result<(), String> {
    if trace.slots.len() != trace.horizon {
        return Err("trace length differs from the horizon".into());
    }
    let classes = effective_classes(scenario, trace.policy);
    let mut replay = Ledger::new(scenario);

    for d in &trace.slots {
        let t = d.slot;
        // Convergence bound: nobody applies to one RB twice.
        if d.muw_matching.proposals > d.muw_matching.participants * trace.muw_rb_count {
            return Err(format!(
                "slot {} exceeded the participants x RBs proposal bound",
                t
            ));
        }
        // Policy-class membership: deadline apps on muW exactly at their
        // slot, later classes on mmW strictly before theirs.
        for (ua, _) in &d.muw_matching.pairs {
            if classes[ua.0] != t {
                return Err(format!("app {} on muW outside its deadline slot", ua.0));
            }
            if !d
                .muw_matching
                .pairs
                .iter()
                .all(|(_, rb)| *rb < trace.muw_rb_count)
            {
                return Err("RB index out of range".into());
            }
        }
        for ua in &d.mmw_order {
            if classes[ua.0] <= t {
                return Err(format!("app {} on mmW at or past its deadline", ua.0));
            }
            if !scenario.ue_of(*ua).los {
                return Err(format!("non-LoS app {} got a mmWave sub-slot", ua.0));
            }
        }
        // Matched apps and delivery records agree.
        for del in &d.muw_deliveries {
            if !d.muw_matching.pairs.iter().any(|(ua, _)| ua == &del.ua) {
                return Err("muW delivery for an unmatched app".into());
            }
        }
        let mmw_uas: Vec<UaId> = d.mmw_deliveries.iter().map(|x| x.ua).collect();
        if mmw_uas != d.mmw_order {
            return Err("mmW deliveries out of order".into());
        }
        // Replay the ledger: bits must be rate x duration truncated at the
        // remaining need, with monotone capped accumulation.
        let banded = d
            .muw_deliveries
            .iter()
            .map(|del| (del, Band::MicroWave))
            .chain(d.mmw_deliveries.iter().map(|del| (del, Band::MmWave)));
        for (del, band) in banded {
            let offered = del.offered_bits();
            let before = replay.remaining_bits(del.ua);
            let expect = offered.min(before);
            if (del.bits_delivered - expect).abs() > 1e-9 * expect.max(1.0) {
                return Err(format!(
                    "delivery to app {} in slot {} is not rate x duration (got {}, want {})",
                    del.ua.0, t, del.bits_delivered, expect
                ));
            }
            replay.record_transmission(del.ua, offered, band);
        }
        replay.expire_class(scenario, t);
    }

    // Replayed ledger must equal the recorded final states.
    for (idx, (got, want)) in replay.states().iter().zip(&trace.final_states).enumerate() {
        if got != want {
            return Err(format!(
                "final state of app {} diverges from the replay",
                idx
            ));
        }
    }

    // Total-load constraint: sum of delivered bits at most B * A, each app
    // capped at B.
    let total: f64 = trace.final_states.iter().map(|s| s.transmitted_bits).sum();
    let budget = scenario.load_bits * scenario.app_count() as f64;
    if total > budget * (1.0 + 1e-12) {
        return Err("total transmitted bits exceed B * A".into());
    }
    for s in &trace.final_states {
        if s.transmitted_bits > scenario.load_bits * (1.0 + 1e-12) {
            return Err("an app exceeded its per-app load".into());
        }
        if s.status == UaStatus::Pending {
            return Err("an app is still pending after the horizon".into());
        }
    }
    Ok(())
}
