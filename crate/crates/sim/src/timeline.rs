//! Step-function timelines.
//!
//! The engine records instance creation/retirement and execution start/end
//! as `(time, +1 | -1)` deltas in non-decreasing time order. These helpers
//! evaluate the resulting step function: its value at an instant, and its
//! maximum and time average over a window. The metrics collector builds the
//! per-window instance and concurrency figures from them.

/// Value of the step function at time `t` (deltas at exactly `t` included).
pub fn timeline_value_at(timeline: &[(f64, i32)], t: f64) -> i64 {
    timeline.iter().take_while(|(at, _)| *at <= t).map(|(_, d)| i64::from(*d)).sum()
}

/// Maximum value attained in the window `[t0, t1]`, including the level
/// carried into the window.
pub fn timeline_max(timeline: &[(f64, i32)], t0: f64, t1: f64) -> i64 {
    let mut level = 0i64;
    let mut max = i64::MIN;
    for (at, delta) in timeline {
        if *at > t1 {
            break;
        }
        level += i64::from(*delta);
        if *at >= t0 {
            max = max.max(level);
        }
    }
    max.max(timeline_value_at(timeline, t0))
}

/// Time average of the step function over `[t0, t1]`.
pub fn timeline_average(timeline: &[(f64, i32)], t0: f64, t1: f64) -> f64 {
    assert!(t1 > t0, "empty averaging window");
    let mut level = i64::from(timeline_value_at(timeline, t0));
    let mut cursor = t0;
    let mut area = 0.0;
    for (at, delta) in timeline {
        if *at <= t0 {
            continue;
        }
        if *at >= t1 {
            break;
        }
        area += level as f64 * (at - cursor);
        cursor = *at;
        level += i64::from(*delta);
    }
    area += level as f64 * (t1 - cursor);
    area / (t1 - t0)
}
