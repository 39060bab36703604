//! The event-driven platform core.
//!
//! Every invocation unfolds as a handful of heap events ordered by
//! `(virtual time, scheduling sequence)`: an arrival routes the call to a
//! warm instance, a fresh instance, or the queue; a compute-done event moves
//! a workflow on to its downstream calls; deadline events throttle queued
//! calls and abort overrunning ones. Processing one event may schedule
//! others at the same instant, which keeps simultaneous arrivals, workflow
//! hand-offs and instance reuse exact without any tick granularity.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::fmt;

use fncap_core::types::{ApplicationGraph, CallMode, DeploymentConfig, FunctionProfile};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::behavior::{derive_payload, synth_response, Behavior, ExchangeTap};
use crate::duration::duration_model;
use crate::error::SimError;
use crate::rng::deployment_rng;

/// Identifier of one submitted invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallId(u64);

impl fmt::Display for CallId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Terminal status of an invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Rejected: no instance became free within the queue allowance.
    Throttled,
    /// Aborted: the request exceeded the deployment timeout.
    Timeout,
}

/// What the caller of one invocation observes.
#[derive(Debug, Clone, PartialEq)]
pub struct InvocationOutcome {
    pub status: Status,
    /// Service time only; `None` unless the invocation completed.
    pub execution_ms: Option<f64>,
    /// Queue wait + cold start + service time.
    pub total_ms: f64,
    /// Instance that served (or was aborted serving) the request.
    pub instance: Option<u64>,
    /// Whether this invocation paid a cold start.
    pub cold: bool,
}

/// An outcome plus when it happened, as kept in the per-function log.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub call: CallId,
    pub arrival_ms: f64,
    pub done_ms: f64,
    pub outcome: InvocationOutcome,
}

/// A resolved call handed back through [`Platform::take_resolved`].
#[derive(Debug)]
pub struct Resolved {
    pub call: CallId,
    pub function: String,
    pub outcome: InvocationOutcome,
    /// Response body; present only for completed invocations.
    pub response: Option<Vec<u8>>,
}

/// Cumulative per-deployment counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Invocations that began executing (includes ones that later timed out).
    pub invocations: u64,
    pub completions: u64,
    pub throttles: u64,
    pub timeouts: u64,
    pub cold_starts: u64,
}

#[derive(Debug)]
struct Instance {
    id: u64,
    #[allow(dead_code)] // kept for inspection/debugging; age is not used in routing
    created_ms: f64,
    last_used_ms: f64,
    busy: bool,
    /// First completion still pending.
    cold: bool,
    /// Retire on completion instead of rejoining the pool (set by `update`).
    doomed: bool,
}

impl Instance {
    fn fresh(id: u64, now: f64) -> Self {
        Instance { id, created_ms: now, last_used_ms: now, busy: false, cold: true, doomed: false }
    }
}

struct Deployment {
    profile: FunctionProfile,
    config: DeploymentConfig,
    behavior: Behavior,
    instances: BTreeMap<u64, Instance>,
    queue: VecDeque<CallId>,
    rng: ChaCha8Rng,
    counters: Counters,
    outcomes: Vec<OutcomeRecord>,
    /// `(time, +1)` on instance creation, `(time, -1)` on retirement.
    instance_timeline: Vec<(f64, i32)>,
    /// `(time, +1)` when an instance starts serving, `(time, -1)` when done.
    busy_timeline: Vec<(f64, i32)>,
}

impl Deployment {
    fn live_count(&self) -> usize {
        self.instances.values().filter(|i| !i.doomed).count()
    }

    fn retire(&mut self, id: u64, now: f64) {
        self.instances.remove(&id);
        self.instance_timeline.push((now, -1));
    }
}

enum CallState {
    Pending,
    Queued,
    Running(RunState),
}

struct RunState {
    instance: u64,
    /// When service began: assignment time plus any cold start.
    exec_start_ms: f64,
    cold: bool,
    /// Virtual time up to which the handler has progressed.
    cursor_ms: f64,
    edge_idx: usize,
    waiting_on: Option<CallId>,
}

struct Call {
    function: String,
    payload: Vec<u8>,
    arrival_ms: f64,
    /// Function that made this call, if any (None for external submits).
    caller: Option<String>,
    /// Workflow call awaiting this one inline.
    parent: Option<CallId>,
    state: CallState,
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Arrival(CallId),
    ComputeDone(CallId),
    QueueDeadline(CallId),
    TaskDeadline(CallId),
}

struct Event {
    at: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.at
            .partial_cmp(&other.at)
            .expect("event times are finite")
            .then(self.seq.cmp(&other.seq))
    }
}

/// The simulated platform: deployments, instances, and the event loop.
pub struct Platform {
    seed: u64,
    clock_ms: f64,
    /// How long a call may wait for a free instance before it is throttled.
    /// Zero (the default) throttles the moment capacity is exhausted.
    queue_timeout_ms: f64,
    reap_interval_ms: f64,
    next_sweep_ms: f64,
    events: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
    next_call: u64,
    next_instance: u64,
    calls: HashMap<CallId, Call>,
    deployments: BTreeMap<String, Deployment>,
    resolved: VecDeque<Resolved>,
    tap: Option<ExchangeTap>,
}

impl Platform {
    pub fn new(seed: u64) -> Self {
        Platform {
            seed,
            clock_ms: 0.0,
            queue_timeout_ms: 0.0,
            reap_interval_ms: 1000.0,
            next_sweep_ms: 1000.0,
            events: BinaryHeap::new(),
            next_seq: 0,
            next_call: 0,
            next_instance: 0,
            calls: HashMap::new(),
            deployments: BTreeMap::new(),
            resolved: VecDeque::new(),
            tap: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn clock_ms(&self) -> f64 {
        self.clock_ms
    }

    pub fn set_queue_timeout_ms(&mut self, ms: f64) {
        self.queue_timeout_ms = ms;
    }

    /// Install an observer for inter-function exchanges (recording runs).
    pub fn set_exchange_tap(&mut self, tap: ExchangeTap) {
        self.tap = Some(tap);
    }

    pub fn clear_exchange_tap(&mut self) {
        self.tap = None;
    }

    // ----- deployment management -------------------------------------------

    pub fn deploy(
        &mut self,
        profile: FunctionProfile,
        config: DeploymentConfig,
        behavior: Behavior,
    ) -> Result<(), SimError> {
        if self.deployments.contains_key(&profile.name) {
            return Err(SimError::DuplicateFunction(profile.name));
        }
        let mut behavior = behavior;
        if let Behavior::Workflow(edges) = &mut behavior {
            edges.sort_by_key(|e| e.position);
        }
        let rng = deployment_rng(self.seed, &profile.name);
        let name = profile.name.clone();
        self.deployments.insert(
            name,
            Deployment {
                profile,
                config,
                behavior,
                instances: BTreeMap::new(),
                queue: VecDeque::new(),
                rng,
                counters: Counters::default(),
                outcomes: Vec::new(),
                instance_timeline: Vec::new(),
                busy_timeline: Vec::new(),
            },
        );
        Ok(())
    }

    /// Deploy every function of an application under one shared config.
    /// Functions with outgoing edges become workflows, leaves pure compute.
    pub fn deploy_app(
        &mut self,
        app: &ApplicationGraph,
        config: DeploymentConfig,
    ) -> Result<(), SimError> {
        for profile in &app.functions {
            let edges: Vec<_> = app.callees(&profile.name).into_iter().cloned().collect();
            let behavior =
                if edges.is_empty() { Behavior::Compute } else { Behavior::Workflow(edges) };
            self.deploy(profile.clone(), config, behavior)?;
        }
        Ok(())
    }

    /// Swap the deployment config. All existing instances are retired (idle
    /// ones now, busy ones when their current call finishes), so the next
    /// invocations start cold under the new configuration.
    pub fn update(&mut self, function: &str, config: DeploymentConfig) -> Result<(), SimError> {
        let now = self.clock_ms;
        let d = self
            .deployments
            .get_mut(function)
            .ok_or_else(|| SimError::UnknownFunction(function.to_string()))?;
        d.config = config;
        let idle: Vec<u64> =
            d.instances.values().filter(|i| !i.busy).map(|i| i.id).collect();
        for id in idle {
            d.retire(id, now);
        }
        for inst in d.instances.values_mut() {
            inst.doomed = true;
        }
        Ok(())
    }

    // ----- submitting and driving ------------------------------------------

    /// Schedule an invocation arriving at `at_ms`. The outcome appears in
    /// [`Platform::take_resolved`] once the event loop reaches it.
    pub fn submit(
        &mut self,
        function: &str,
        payload: Vec<u8>,
        at_ms: f64,
    ) -> Result<CallId, SimError> {
        if !self.deployments.contains_key(function) {
            return Err(SimError::UnknownFunction(function.to_string()));
        }
        if at_ms < self.clock_ms {
            return Err(SimError::TimeTravel { at_ms, clock_ms: self.clock_ms });
        }
        Ok(self.create_call(function.to_string(), payload, at_ms, None, None))
    }

    /// Submit, then run the event loop until this call resolves.
    pub fn invoke(
        &mut self,
        function: &str,
        payload: Vec<u8>,
        at_ms: f64,
    ) -> Result<InvocationOutcome, SimError> {
        let id = self.submit(function, payload, at_ms)?;
        loop {
            if let Some(pos) = self.resolved.iter().position(|r| r.call == id) {
                return Ok(self.resolved.remove(pos).expect("position just found").outcome);
            }
            if !self.step() {
                return Err(SimError::Stalled(id));
            }
        }
    }

    /// Process the next event, if any. Idle-instance sweeps scheduled before
    /// it run first.
    pub fn step(&mut self) -> bool {
        let Some(Reverse(next)) = self.events.peek() else { return false };
        let at = next.at;
        while self.next_sweep_ms <= at {
            let sweep = self.next_sweep_ms;
            self.clock_ms = self.clock_ms.max(sweep);
            self.sweep_idle();
            self.next_sweep_ms += self.reap_interval_ms;
        }
        let Reverse(event) = self.events.pop().expect("peeked above");
        self.clock_ms = self.clock_ms.max(event.at);
        match event.kind {
            EventKind::Arrival(id) => self.on_arrival(id),
            EventKind::ComputeDone(id) => self.on_compute_done(id),
            EventKind::QueueDeadline(id) => self.throttle_if_queued(id),
            EventKind::TaskDeadline(id) => self.on_task_deadline(id),
        }
        true
    }

    /// Process every event scheduled up to `t_ms` and advance the clock to it.
    pub fn run_until(&mut self, t_ms: f64) {
        while matches!(self.events.peek(), Some(Reverse(e)) if e.at <= t_ms) {
            self.step();
        }
        while self.next_sweep_ms <= t_ms {
            let sweep = self.next_sweep_ms;
            self.clock_ms = self.clock_ms.max(sweep);
            self.sweep_idle();
            self.next_sweep_ms += self.reap_interval_ms;
        }
        self.clock_ms = self.clock_ms.max(t_ms);
    }

    /// Drain the event queue completely.
    pub fn run_to_idle(&mut self) {
        while self.step() {}
    }

    pub fn next_event_at(&self) -> Option<f64> {
        self.events.peek().map(|Reverse(e)| e.at)
    }

    /// Calls resolved since the last drain, in resolution order.
    pub fn take_resolved(&mut self) -> Vec<Resolved> {
        self.resolved.drain(..).collect()
    }

    /// Retire instances that have sat idle longer than their profile allows.
    /// Sweeps also run automatically at a fixed virtual cadence.
    pub fn reap_idle(&mut self, now_ms: f64) -> usize {
        self.clock_ms = self.clock_ms.max(now_ms);
        self.sweep_idle()
    }

    fn sweep_idle(&mut self) -> usize {
        let now = self.clock_ms;
        let mut reaped = 0;
        for d in self.deployments.values_mut() {
            let idle_ms = d.profile.idle_timeout_s * 1000.0;
            let expired: Vec<u64> = d
                .instances
                .values()
                .filter(|i| !i.busy && now - i.last_used_ms > idle_ms)
                .map(|i| i.id)
                .collect();
            for id in expired {
                d.retire(id, now);
                reaped += 1;
            }
        }
        reaped
    }

    // ----- inspection -------------------------------------------------------

    pub fn deployment_names(&self) -> Vec<&str> {
        self.deployments.keys().map(String::as_str).collect()
    }

    pub fn config(&self, function: &str) -> Option<DeploymentConfig> {
        self.deployments.get(function).map(|d| d.config)
    }

    pub fn profile(&self, function: &str) -> Option<&FunctionProfile> {
        self.deployments.get(function).map(|d| &d.profile)
    }

    pub fn counters(&self, function: &str) -> Option<Counters> {
        self.deployments.get(function).map(|d| d.counters)
    }

    /// Completed/throttled/timed-out invocations of one function, in
    /// resolution order.
    pub fn outcomes(&self, function: &str) -> Option<&[OutcomeRecord]> {
        self.deployments.get(function).map(|d| d.outcomes.as_slice())
    }

    /// Instance creations (+1) and retirements (-1) over virtual time.
    pub fn instance_timeline(&self, function: &str) -> Option<&[(f64, i32)]> {
        self.deployments.get(function).map(|d| d.instance_timeline.as_slice())
    }

    /// Executions starting (+1) and ending (-1) over virtual time.
    pub fn busy_timeline(&self, function: &str) -> Option<&[(f64, i32)]> {
        self.deployments.get(function).map(|d| d.busy_timeline.as_slice())
    }

    pub fn live_instances(&self, function: &str) -> Option<usize> {
        self.deployments.get(function).map(|d| d.instances.len())
    }

    // ----- event handlers ---------------------------------------------------

    fn schedule(&mut self, at: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(Reverse(Event { at, seq, kind }));
    }

    fn create_call(
        &mut self,
        function: String,
        payload: Vec<u8>,
        at: f64,
        caller: Option<String>,
        parent: Option<CallId>,
    ) -> CallId {
        let id = CallId(self.next_call);
        self.next_call += 1;
        self.calls.insert(
            id,
            Call { function, payload, arrival_ms: at, caller, parent, state: CallState::Pending },
        );
        self.schedule(at, EventKind::Arrival(id));
        id
    }

    fn on_arrival(&mut self, id: CallId) {
        let now = self.clock_ms;
        let function = match self.calls.get(&id) {
            Some(c) => c.function.clone(),
            None => return,
        };
        let queue_timeout = self.queue_timeout_ms;
        let fresh_id = self.next_instance;
        let mut created = false;
        // Route: warm instance, new instance, or the queue.
        let assignment: Option<(u64, bool)> = {
            let d = self.deployments.get_mut(&function).expect("checked at submit");
            // Retire expired idle instances before reusing one: a stale
            // environment would have been reaped on a real platform.
            let idle_ms = d.profile.idle_timeout_s * 1000.0;
            let expired: Vec<u64> = d
                .instances
                .values()
                .filter(|i| !i.busy && now - i.last_used_ms > idle_ms)
                .map(|i| i.id)
                .collect();
            for iid in expired {
                d.retire(iid, now);
            }
            let warm = d
                .instances
                .values()
                .filter(|i| !i.busy && !i.doomed)
                .max_by(|a, b| {
                    a.last_used_ms
                        .partial_cmp(&b.last_used_ms)
                        .expect("timestamps are finite")
                        .then(b.id.cmp(&a.id))
                })
                .map(|i| i.id);
            if let Some(iid) = warm {
                Some((iid, false))
            } else if (d.live_count() as u32) < d.config.concurrency {
                d.instances.insert(fresh_id, Instance::fresh(fresh_id, now));
                d.instance_timeline.push((now, 1));
                created = true;
                Some((fresh_id, true))
            } else {
                d.queue.push_back(id);
                None
            }
        };
        if created {
            self.next_instance += 1;
        }
        match assignment {
            Some((instance, cold)) => self.begin_execution(id, &function, instance, now, cold),
            None => {
                self.calls.get_mut(&id).expect("call exists").state = CallState::Queued;
                self.schedule(now + queue_timeout, EventKind::QueueDeadline(id));
            }
        }
    }

    fn begin_execution(&mut self, id: CallId, function: &str, instance: u64, now: f64, cold: bool) {
        let arrival = self.calls.get(&id).expect("call exists").arrival_ms;
        let (own_end, exec_start, deadline) = {
            let d = self.deployments.get_mut(function).expect("deployed");
            d.counters.invocations += 1;
            if cold {
                d.counters.cold_starts += 1;
            }
            let inst = d.instances.get_mut(&instance).expect("instance exists");
            inst.busy = true;
            d.busy_timeline.push((now, 1));
            let exec_start = now + if cold { d.profile.cold_start_ms } else { 0.0 };
            let own_ms = match &mut d.behavior {
                Behavior::Replay { latency_ms, .. } => *latency_ms,
                _ => {
                    duration_model(&d.profile, d.config.memory_mib)
                        * noise_factor(&mut d.rng, d.profile.noise_sigma)
                }
            };
            (exec_start + own_ms, exec_start, arrival + d.config.timeout_ms as f64)
        };
        self.calls.get_mut(&id).expect("call exists").state = CallState::Running(RunState {
            instance,
            exec_start_ms: exec_start,
            cold,
            cursor_ms: own_end,
            edge_idx: 0,
            waiting_on: None,
        });
        self.schedule(own_end, EventKind::ComputeDone(id));
        self.schedule(deadline, EventKind::TaskDeadline(id));
    }

    fn on_compute_done(&mut self, id: CallId) {
        // Stale events for finished or aborted calls fall through here.
        let running = matches!(
            self.calls.get(&id),
            Some(Call { state: CallState::Running(rs), .. }) if rs.waiting_on.is_none()
        );
        if running {
            self.advance_workflow(id);
        }
    }

    /// Fire downstream edges from the handler's cursor until one blocks
    /// (sync) or the edge list is exhausted (handler completes).
    fn advance_workflow(&mut self, id: CallId) {
        loop {
            let (function, payload, cursor, edge_idx) = {
                let Some(call) = self.calls.get(&id) else { return };
                let CallState::Running(rs) = &call.state else { return };
                (call.function.clone(), call.payload.clone(), rs.cursor_ms, rs.edge_idx)
            };
            let edge = {
                let d = self.deployments.get(&function).expect("deployed");
                match &d.behavior {
                    Behavior::Workflow(edges) => edges.get(edge_idx).cloned(),
                    _ => None,
                }
            };
            let Some(edge) = edge else {
                self.finish_handler(id);
                return;
            };
            assert!(
                self.deployments.contains_key(&edge.callee),
                "workflow edge {function} -> {} fires but the callee is not deployed",
                edge.callee
            );
            let child_payload = derive_payload(&function, &payload);
            let sync = edge.mode == CallMode::Sync;
            let child = self.create_call(
                edge.callee,
                child_payload,
                cursor,
                Some(function),
                sync.then_some(id),
            );
            let call = self.calls.get_mut(&id).expect("call exists");
            let CallState::Running(rs) = &mut call.state else { unreachable!() };
            rs.edge_idx += 1;
            if sync {
                rs.waiting_on = Some(child);
                return;
            }
        }
    }

    fn finish_handler(&mut self, id: CallId) {
        let (function, payload, arrival) = {
            let call = self.calls.get(&id).expect("call exists");
            (call.function.clone(), call.payload.clone(), call.arrival_ms)
        };
        let (instance, exec_start, cold, cursor) = {
            let call = self.calls.get(&id).expect("call exists");
            let CallState::Running(rs) = &call.state else { unreachable!("finishing non-running") };
            (rs.instance, rs.exec_start_ms, rs.cold, rs.cursor_ms)
        };
        let response = {
            let d = self.deployments.get_mut(&function).expect("deployed");
            d.counters.completions += 1;
            d.busy_timeline.push((cursor, -1));
            match &mut d.behavior {
                Behavior::Replay { lookup, .. } => lookup(&payload),
                _ => synth_response(&function, &payload, d.profile.response_size),
            }
        };
        let outcome = InvocationOutcome {
            status: Status::Ok,
            execution_ms: Some(cursor - exec_start),
            total_ms: cursor - arrival,
            instance: Some(instance),
            cold,
        };
        self.log_outcome(&function, id, arrival, cursor, outcome.clone());
        self.free_instance(&function, instance, cursor);
        self.resolve(id, outcome, Some(response));
    }

    fn on_task_deadline(&mut self, id: CallId) {
        let now = self.clock_ms;
        let Some(call) = self.calls.get(&id) else { return };
        let function = call.function.clone();
        let arrival = call.arrival_ms;
        match &call.state {
            CallState::Running(rs) => {
                let (instance, cold) = (rs.instance, rs.cold);
                {
                    let d = self.deployments.get_mut(&function).expect("deployed");
                    d.counters.timeouts += 1;
                    d.busy_timeline.push((now, -1));
                }
                let outcome = InvocationOutcome {
                    status: Status::Timeout,
                    execution_ms: None,
                    total_ms: now - arrival,
                    instance: Some(instance),
                    cold,
                };
                self.log_outcome(&function, id, arrival, now, outcome.clone());
                // The execution is killed but the environment survives: the
                // instance goes back to the warm pool, as on real platforms.
                self.free_instance(&function, instance, now);
                self.resolve(id, outcome, None);
            }
            // Reached only when queue_timeout exceeds the request timeout.
            CallState::Queued => self.throttle_if_queued(id),
            CallState::Pending => {}
        }
    }

    fn throttle_if_queued(&mut self, id: CallId) {
        let now = self.clock_ms;
        let Some(call) = self.calls.get(&id) else { return };
        if !matches!(call.state, CallState::Queued) {
            return;
        }
        let function = call.function.clone();
        let arrival = call.arrival_ms;
        {
            let d = self.deployments.get_mut(&function).expect("deployed");
            if let Some(pos) = d.queue.iter().position(|c| *c == id) {
                d.queue.remove(pos);
            }
            d.counters.throttles += 1;
        }
        let outcome = InvocationOutcome {
            status: Status::Throttled,
            execution_ms: None,
            total_ms: now - arrival,
            instance: None,
            cold: false,
        };
        self.log_outcome(&function, id, arrival, now, outcome.clone());
        self.resolve(id, outcome, None);
    }

    /// Return an instance to the pool (or retire it if doomed) and hand it,
    /// or a replacement, to the next queued call.
    fn free_instance(&mut self, function: &str, instance: u64, now: f64) {
        let fresh_id = self.next_instance;
        let mut created = false;
        let dequeued: Option<(CallId, u64, bool)> = {
            let d = self.deployments.get_mut(function).expect("deployed");
            let inst = d.instances.get_mut(&instance).expect("instance exists");
            inst.busy = false;
            inst.cold = false;
            inst.last_used_ms = now;
            if inst.doomed {
                d.retire(instance, now);
                if !d.queue.is_empty() && (d.live_count() as u32) < d.config.concurrency {
                    d.instances.insert(fresh_id, Instance::fresh(fresh_id, now));
                    d.instance_timeline.push((now, 1));
                    created = true;
                    Some((d.queue.pop_front().expect("non-empty"), fresh_id, true))
                } else {
                    None
                }
            } else {
                d.queue.pop_front().map(|next| (next, instance, false))
            }
        };
        if created {
            self.next_instance += 1;
        }
        if let Some((next, inst, cold)) = dequeued {
            self.begin_execution(next, function, inst, now, cold);
        }
    }

    fn log_outcome(
        &mut self,
        function: &str,
        call: CallId,
        arrival_ms: f64,
        done_ms: f64,
        outcome: InvocationOutcome,
    ) {
        self.deployments.get_mut(function).expect("deployed").outcomes.push(OutcomeRecord {
            call,
            arrival_ms,
            done_ms,
            outcome,
        });
    }

    /// Final step of every call: report the outcome, notify the recording
    /// tap, and resume a parent workflow waiting on this call.
    fn resolve(&mut self, id: CallId, outcome: InvocationOutcome, response: Option<Vec<u8>>) {
        let call = self.calls.remove(&id).expect("resolving unknown call");
        if let (Some(caller), Some(resp)) = (&call.caller, &response) {
            if let Some(tap) = self.tap.as_mut() {
                tap(crate::behavior::Exchange {
                    caller,
                    callee: &call.function,
                    payload: &call.payload,
                    response: resp,
                    at_ms: self.clock_ms,
                });
            }
        }
        self.resolved.push_back(Resolved {
            call: id,
            function: call.function,
            outcome,
            response,
        });
        if let Some(pid) = call.parent {
            let resume = match self.calls.get_mut(&pid) {
                Some(parent) => match &mut parent.state {
                    CallState::Running(rs) if rs.waiting_on == Some(id) => {
                        rs.waiting_on = None;
                        rs.cursor_ms = self.clock_ms;
                        true
                    }
                    _ => false,
                },
                // Parent already timed out; the child ran for nothing.
                None => false,
            };
            if resume {
                self.advance_workflow(pid);
            }
        }
    }
}

fn noise_factor(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    LogNormal::new(0.0, sigma).expect("sigma is finite and positive").sample(rng)
}
