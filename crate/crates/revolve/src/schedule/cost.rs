//! Cost kernel for binomial checkpoint schedules.
//!
//! `beta(s, t) = C(s+t, t)` is the largest step count reversible with `s`
//! checkpoint slots and repetition number `t`. The minimal total number of
//! forward (advance) steps for reversing `l` steps with `s` slots is
//! `t*l - beta(s+1, t-1)` with `t` minimal such that `beta(s, t) >= l`
//! (Griewank & Walther). `optimal_dp` recomputes the same minimum from the
//! first-checkpoint recurrence and serves as the independent oracle.

use crate::error::{Error, Result};

/// Hard limits for the exact DP oracle; larger instances are refused.
pub const DP_MAX_STEPS: usize = 512;
pub const DP_MAX_SNAPS: usize = 16;

/// Binomial coefficient `C(s+t, t)`: the maximal number of time steps
/// reversible with `s` slots and repetition number `t`. Exact, overflow-checked.
pub fn beta(s: u64, t: u64) -> Result<u64> {
    // C(s+t, t) via the multiplicative formula; every prefix is itself a
    // binomial coefficient, so the division is exact at each step.
    let k = t.min(s);
    let n = s.checked_add(t).ok_or(Error::Overflow("beta"))?;
    let mut acc: u64 = 1;
    for i in 1..=k {
        let wide = (acc as u128) * ((n - k + i) as u128);
        let wide = wide / (i as u128);
        acc = u64::try_from(wide).map_err(|_| Error::Overflow("beta"))?;
    }
    Ok(acc)
}

/// Repetition number: minimal `t` with `beta(snaps, t) >= steps`.
///
/// For `steps == 1` this is 0 (one step reverses with no recomputation).
pub fn repetitions(steps: u64, snaps: u64) -> Result<u64> {
    if steps <= 1 {
        return Ok(0);
    }
    if snaps == 1 {
        // beta(1, t) = t + 1
        return Ok(steps - 1);
    }
    let mut t = 0u64;
    let mut range = 1u64; // beta(snaps, t)
    while range < steps {
        t += 1;
        // beta(s, t) = beta(s, t-1) * (s + t) / t, exact at every step.
        let wide = (range as u128) * ((snaps + t) as u128) / (t as u128);
        range = u64::try_from(wide).map_err(|_| Error::Overflow("repetitions"))?;
    }
    Ok(t)
}

/// Minimal total forward steps (original sweep plus recomputation) of the
/// optimal schedule for `steps` time steps and `snaps` checkpoint slots.
///
/// The final forward step is fused into the first adjoint step and is not an
/// advance, so `steps = 1` costs 0 and `snaps >= steps - 1` costs `steps - 1`.
pub fn min_advances(steps: u64, snaps: u64) -> Result<u64> {
    if steps == 0 {
        return Err(Error::Config("steps must be >= 1".into()));
    }
    if snaps == 0 {
        return Err(Error::Config("snaps must be >= 1".into()));
    }
    if steps == 1 {
        return Ok(0);
    }
    if snaps == 1 {
        // t = steps - 1, p = t*steps - beta(2, t-1) = steps*(steps-1)/2
        return steps
            .checked_mul(steps - 1)
            .map(|x| x / 2)
            .ok_or(Error::Overflow("min_advances"));
    }
    let t = repetitions(steps, snaps)?;
    let tl = t
        .checked_mul(steps)
        .ok_or(Error::Overflow("min_advances"))?;
    let b = beta(snaps + 1, t - 1)?;
    Ok(tl - b)
}

/// Exact minimum total advances from the first-checkpoint split recurrence
///
/// ```text
/// cost(1, s) = 0
/// cost(l, s) = min over k in [1, l-1] of  k + cost(l-k, s-1) + cost(k, s)
/// ```
///
/// with `cost(l, 0)` undefined for `l > 1`. Memoized bottom-up; used only as
/// the independent oracle in tests and verification, so instances beyond
/// [`DP_MAX_STEPS`] x [`DP_MAX_SNAPS`] are refused.
pub fn optimal_dp(steps: usize, snaps: usize) -> Result<u64> {
    if steps == 0 || snaps == 0 {
        return Err(Error::Config("steps and snaps must be >= 1".into()));
    }
    if steps > DP_MAX_STEPS || snaps > DP_MAX_SNAPS {
        return Err(Error::DpTooLarge {
            steps,
            snaps,
            max_steps: DP_MAX_STEPS,
            max_snaps: DP_MAX_SNAPS,
        });
    }
    // table[s][l]: None where undefined (s = 0, l >= 2).
    let mut table: Vec<Vec<Option<u64>>> = vec![vec![None; steps + 1]; snaps + 1];
    for row in table.iter_mut() {
        row[1] = Some(0);
    }
    for s in 1..=snaps {
        for l in 2..=steps {
            let mut best: Option<u64> = None;
            for k in 1..l {
                let (Some(right), Some(left)) = (table[s - 1][l - k], table[s][k]) else {
                    continue;
                };
                let c = k as u64 + right + left;
                if best.is_none_or(|b| c < b) {
                    best = Some(c);
                }
            }
            table[s][l] = best;
        }
    }
    table[snaps][steps].ok_or_else(|| Error::Config("instance not reversible".into()))
}

/// Slot count minimizing the memory-runtime product
/// `c * min_advances(steps, c)`, ties broken toward smaller `c`.
pub fn adjust(steps: u64) -> Result<u64> {
    if steps == 0 {
        return Err(Error::Config("steps must be >= 1".into()));
    }
    let mut best_c = 1u64;
    let mut best_v = min_advances(steps, 1)?; // c = 1: product is the cost itself
    for c in 2..=steps {
        // For any slot count, min_advances >= steps - 1, so once
        // c * (steps - 1) exceeds the incumbent no larger c can win.
        if best_v > 0 && c.saturating_mul(steps - 1) > best_v {
            break;
        }
        let v = c
            .checked_mul(min_advances(steps, c)?)
            .ok_or(Error::Overflow("adjust"))?;
        if v < best_v {
            best_c = c;
            best_v = v;
        }
    }
    Ok(best_c)
}

/// Objective value `c * min_advances(steps, c)` at the chosen slot count.
pub fn adjust_objective(steps: u64, snaps: u64) -> Result<u64> {
    snaps
        .checked_mul(min_advances(steps, snaps)?)
        .ok_or(Error::Overflow("adjust_objective"))
}
