//! Event-driven (n, k) fork-join simulation.
//!
//! Jobs arrive as a Poisson(λ) stream. Each job forks one task to every one of
//! the n FCFS node queues; a node serves one task at a time for an
//! `Exp(k·μ)` duration. When k tasks of a job have been served the job
//! departs and its remaining n - k tasks are abandoned.
//!
//! Every node serves jobs in arrival order, so a node's queue is exactly the
//! set of live jobs newer than the last one it touched. Nodes therefore keep
//! a cursor into the live-job window instead of an explicit queue.

use std::collections::VecDeque;

use crate::analytic::SystemParams;
use crate::stat::RngStream;

/// What happens to a departing job's task that is currently in service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CancelPolicy {
    /// The node aborts the task at once and starts its next queued task.
    #[default]
    Preempt,
    /// Only queued tasks are removed; an in-service task runs to completion
    /// and its result is discarded.
    QueuedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskState {
    Queued,
    InService,
    Served,
    Abandoned,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival,
    Completion { node: u32, generation: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Service {
    job: u64,
    generation: u32,
    start: f64,
}

#[derive(Debug, Default)]
struct Node {
    serving: Option<Service>,
    generations: u32,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    arrival: f64,
    served: u32,
    departed: bool,
}

/// Bookkeeping used to check the task life cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TaskAudit {
    pub jobs_departed: u64,
    pub tasks_served: u64,
    pub tasks_abandoned: u64,
    /// Abandoned tasks that were in service at the departure instant.
    pub aborted_in_service: u64,
    /// Service completions whose result was discarded (queued-only policy).
    pub wasted_completions: u64,
    /// Departures whose task tally was not `k` served and `n - k` abandoned.
    pub conservation_violations: u64,
    /// Completions timestamped before their service start, or a node asked to
    /// start a second task while busy.
    pub causality_violations: u64,
}

/// Output of one fork-join replication.
#[derive(Debug, Clone)]
pub struct ForkJoinRun {
    /// Response times of post-warm-up jobs in arrival order.
    pub samples: Vec<f64>,
    /// Time-average number of jobs in system over the observation window.
    pub time_avg_in_system: f64,
    /// Length of the observation window: from the first recorded arrival to
    /// the last departure.
    pub window: f64,
    pub audit: TaskAudit,
}

struct Engine {
    n: usize,
    k: u32,
    service_rate: f64,
    policy: CancelPolicy,
    rng: RngStream,
    events: crate::sim::event::EventQueue<Event>,
    nodes: Vec<Node>,
    /// Live jobs `head..head + jobs.len()`.
    jobs: VecDeque<Job>,
    /// `n` task states per live job, laid out job-major.
    tasks: VecDeque<TaskState>,
    head: u64,
    audit: TaskAudit,
}

impl Engine {
    fn tail(&self) -> u64 {
        self.head + self.jobs.len() as u64
    }

    fn slot(&self, job: u64) -> usize {
        (job - self.head) as usize
    }

    fn task_mut(&mut self, job: u64, node: usize) -> &mut TaskState {
        let idx = self.slot(job) * self.n + node;
        &mut self.tasks[idx]
    }

    /// Starts the oldest live job at or after `from` on `node`, if any.
    fn start_next(&mut self, node: usize, from: u64, now: f64) {
        let mut id = from.max(self.head);
        let tail = self.tail();
        while id < tail && self.jobs[self.slot(id)].departed {
            id += 1;
        }
        if id >= tail {
            return;
        }
        if self.nodes[node].serving.is_some() {
            self.audit.causality_violations += 1;
            return;
        }
        let n = &mut self.nodes[node];
        n.generations = n.generations.wrapping_add(1);
        let generation = n.generations;
        n.serving = Some(Service {
            job: id,
            generation,
            start: now,
        });
        *self.task_mut(id, node) = TaskState::InService;
        let done = now + self.rng.exp_unchecked(self.service_rate);
        self.events.push(
            done,
            Event::Completion {
                node: node as u32,
                generation,
            },
        );
    }

    fn depart(&mut self, job: u64) {
        let slot = self.slot(job);
        self.jobs[slot].departed = true;
        self.audit.jobs_departed += 1;
        let (mut served, mut abandoned) = (0u32, 0u32);
        for node in 0..self.n {
            let state = self.task_mut(job, node);
            match *state {
                TaskState::Served => served += 1,
                TaskState::InService => {
                    *state = TaskState::Abandoned;
                    abandoned += 1;
                    self.audit.aborted_in_service += 1;
                }
                TaskState::Queued => {
                    *state = TaskState::Abandoned;
                    abandoned += 1;
                }
                TaskState::Abandoned => abandoned += 1,
            }
        }
        self.audit.tasks_abandoned += abandoned as u64;
        if served != self.k || abandoned as usize != self.n - self.k as usize {
            self.audit.conservation_violations += 1;
        }
        while self.jobs.front().is_some_and(|j| j.departed) {
            self.jobs.pop_front();
            for _ in 0..self.n {
                self.tasks.pop_front();
            }
            self.head += 1;
        }
    }
}

/// Runs one replication of `num_requests` arrivals, discarding the first
/// `warmup` jobs from the statistics, and drains the system.
///
/// Callers must have checked that the system is stable, `lambda > 0` and
/// `warmup < num_requests`.
pub fn run_forkjoin_replication(
    params: &SystemParams,
    policy: CancelPolicy,
    num_requests: usize,
    warmup: usize,
    rng: RngStream,
) -> ForkJoinRun {
    let n = params.n();
    let mut eng = Engine {
        n,
        k: params.k() as u32,
        service_rate: params.mu_prime(),
        policy,
        rng,
        events: crate::sim::event::EventQueue::with_capacity(2 * n + 2),
        nodes: (0..n).map(|_| Node::default()).collect(),
        jobs: VecDeque::new(),
        tasks: VecDeque::new(),
        head: 0,
        audit: TaskAudit::default(),
    };
    let lambda = params.lambda();
    let mut samples = Vec::with_capacity(num_requests.saturating_sub(warmup));
    let mut arrivals = 0usize;
    let first = eng.rng.exp_unchecked(lambda);
    eng.events.push(first, Event::Arrival);

    let mut window_start: Option<f64> = None;
    let mut last_time = 0.0f64;
    let mut area = 0.0;
    let mut last_departure = 0.0;
    let mut in_system = 0usize;

    while let Some((now, event)) = eng.events.pop() {
        if let Some(start) = window_start {
            area += in_system as f64 * (now - last_time.max(start));
        }
        last_time = now;
        match event {
            Event::Arrival => {
                let id = eng.tail();
                if arrivals == warmup {
                    window_start = Some(now);
                }
                eng.jobs.push_back(Job {
                    arrival: now,
                    served: 0,
                    departed: false,
                });
                eng.tasks.extend(std::iter::repeat_n(TaskState::Queued, n));
                arrivals += 1;
                in_system += 1;
                if arrivals < num_requests {
                    let next = now + eng.rng.exp_unchecked(lambda);
                    eng.events.push(next, Event::Arrival);
                }
                for node in 0..n {
                    if eng.nodes[node].serving.is_none() {
                        eng.start_next(node, id, now);
                    }
                }
            }
            Event::Completion { node, generation } => {
                let node = node as usize;
                let Some(svc) = eng.nodes[node].serving else { continue };
                if svc.generation != generation {
                    continue;
                }
                eng.nodes[node].serving = None;
                if now < svc.start {
                    eng.audit.causality_violations += 1;
                }
                let job = svc.job;
                let live = job >= eng.head && !eng.jobs[eng.slot(job)].departed;
                if live {
                    *eng.task_mut(job, node) = TaskState::Served;
                    eng.audit.tasks_served += 1;
                    let slot = eng.slot(job);
                    eng.jobs[slot].served += 1;
                    if eng.jobs[slot].served == eng.k {
                        let arrival = eng.jobs[slot].arrival;
                        if job as usize >= warmup {
                            samples.push(now - arrival);
                        }
                        last_departure = now;
                        in_system -= 1;
                        eng.depart(job);
                        if eng.policy == CancelPolicy::Preempt {
                            for i in 0..n {
                                if eng.nodes[i].serving.is_some_and(|s| s.job == job) {
                                    eng.nodes[i].serving = None;
                                    eng.start_next(i, job + 1, now);
                                }
                            }
                        }
                    }
                } else {
                    eng.audit.wasted_completions += 1;
                }
                eng.start_next(node, job + 1, now);
            }
        }
    }

    let window = window_start.map_or(0.0, |s| last_departure - s);
    ForkJoinRun {
        samples,
        time_avg_in_system: if window > 0.0 { area / window } else { 0.0 },
        window,
        audit: eng.audit,
    }
}
