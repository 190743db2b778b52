//! Deterministic error timer driven by the scheduler's initiator/responder
//! coin instead of transition randomness.
//!
//! The timer counts in blocks of `k` interactions. A block in which the agent
//! was never the responder (probability `2^-k`) advances `errorcount`; the
//! timer fires once `errorcount` wraps past `m - 1`. Expected length is
//! about `m * k * 2^k` interactions, using `2 * m * k` states.

use serde::Serialize;

use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SyntheticTimerFields {
    pub errorcount: u32,
    pub clock: u32,
    pub decrement: bool,
}

/// `(m, k)` with `m = floor(4n / log2 ln n)` and `k = floor(log2 ln n)`, both
/// at least 1.
pub fn synthetic_timer_dims(n: usize) -> (u32, u32) {
    let ll = (n as f64).ln().log2();
    let k = if ll.is_finite() && ll >= 1.0 { ll.floor() as u32 } else { 1 };
    let m = if ll.is_finite() && ll > 0.0 {
        ((4.0 * n as f64) / ll).floor() as u32
    } else {
        4 * n as u32
    };
    (m.max(1), k)
}

impl SyntheticTimerFields {
    pub fn start() -> Self {
        Self {
            errorcount: 0,
            clock: 0,
            decrement: false,
        }
    }

    pub fn state_count(params: &Params) -> u64 {
        let (m, k) = synthetic_timer_dims(params.n);
        2 * m as u64 * k as u64
    }
}

/// One interaction of an Unsettled agent's timer. Returns the new fields and
/// whether the timer fired.
pub fn synthetic_error_timer_step(
    t: SyntheticTimerFields,
    is_responder: bool,
    params: &Params,
) -> (SyntheticTimerFields, bool) {
    let (m, k) = synthetic_timer_dims(params.n);
    let mut t = t;
    if is_responder {
        t.decrement = false;
    }
    t.clock = (t.clock + 1) % k;
    let mut fired = false;
    if t.clock == 0 {
        if t.decrement {
            t.errorcount += 1;
            if t.errorcount >= m {
                t.errorcount = 0;
                fired = true;
            }
        }
        t.decrement = true;
    }
    (t, fired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Randomness, RngStream};

    fn with_k(k_target: u32) -> Params {
        // smallest n whose floor(log2 ln n) equals the target
        (2..100_000)
            .map(|n| Params::new(n).unwrap())
            .find(|p| synthetic_timer_dims(p.n).1 == k_target && (p.n as f64).ln().log2() >= 1.0)
            .unwrap()
    }

    #[test]
    fn dims() {
        assert_eq!(synthetic_timer_dims(2), (8, 1));
        // ln(1000) = 6.9078, log2 = 2.788
        assert_eq!(synthetic_timer_dims(1000), ((4000.0f64 / 6.9078f64.log2()) as u32, 2));
        let p = Params::new(1000).unwrap();
        let (m, k) = synthetic_timer_dims(1000);
        assert_eq!(SyntheticTimerFields::state_count(&p), 2 * m as u64 * k as u64);
    }

    #[test]
    fn responder_event_spoils_the_block() {
        let p = with_k(2);
        let mut t = SyntheticTimerFields::start();
        // first block arms the flag
        for _ in 0..2 {
            t = synthetic_error_timer_step(t, false, &p).0;
        }
        assert!(t.decrement);
        assert_eq!(t.errorcount, 0);
        // a block containing a responder event does not count
        t = synthetic_error_timer_step(t, true, &p).0;
        t = synthetic_error_timer_step(t, false, &p).0;
        assert_eq!(t.errorcount, 0);
        assert!(t.decrement);
        // an all-initiator block counts
        t = synthetic_error_timer_step(t, false, &p).0;
        t = synthetic_error_timer_step(t, false, &p).0;
        assert_eq!(t.errorcount, 1);
    }

    #[test]
    fn unit_blocks_wrap_every_interaction() {
        let p = Params::new(2).unwrap();
        assert_eq!(synthetic_timer_dims(2).1, 1);
        let t = SyntheticTimerFields {
            errorcount: 0,
            clock: 0,
            decrement: true,
        };
        let (after_init, _) = synthetic_error_timer_step(t, false, &p);
        assert_eq!(after_init.errorcount, 1);
        assert!(after_init.decrement);
        let (after_resp, _) = synthetic_error_timer_step(t, true, &p);
        assert_eq!(after_resp.errorcount, 0);
        assert!(after_resp.decrement);
    }

    #[test]
    fn fires_after_m_counted_blocks() {
        let p = Params::new(2).unwrap();
        let (m, _) = synthetic_timer_dims(2);
        let mut t = SyntheticTimerFields::start();
        let mut fired_at = None;
        for i in 0..100 {
            let (next, fired) = synthetic_error_timer_step(t, false, &p);
            t = next;
            if fired {
                fired_at = Some(i);
                break;
            }
        }
        // the first interaction only arms the flag
        assert_eq!(fired_at, Some(m as usize));
        assert_eq!(t.errorcount, 0);
    }

    #[test]
    fn mean_length_is_m_k_two_to_k() {
        let p = with_k(2);
        let (m, k) = synthetic_timer_dims(p.n);
        let mut rng = RngStream::new(17);
        let trials = 400;
        let mut total = 0u64;
        for _ in 0..trials {
            let mut t = SyntheticTimerFields::start();
            let mut steps = 0u64;
            loop {
                steps += 1;
                let (next, fired) = synthetic_error_timer_step(t, rng.chance(0.5), &p);
                t = next;
                if fired {
                    break;
                }
            }
            total += steps;
        }
        let mean = total as f64 / trials as f64;
        let expected = (m * k * (1 << k)) as f64;
        assert!((mean / expected - 1.0).abs() < 0.1, "mean {mean} vs {expected}");
    }
}
