//! Self-stabilizing leaderless phase clock.

use serde::Serialize;

use crate::params::Params;

/// `phase` is stored in 64 bits; overflow is out of reach for any feasible run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PhaseClockFields {
    pub phase: u64,
    pub countdown: u32,
}

/// Which agents changed phase during the interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClockAdvance {
    pub a: bool,
    pub b: bool,
}

pub fn phase_clock_step(
    a: &mut PhaseClockFields,
    b: &mut PhaseClockFields,
    params: &Params,
) -> ClockAdvance {
    if a.phase == b.phase {
        a.countdown = a.countdown.saturating_sub(1);
        b.countdown = b.countdown.saturating_sub(1);
        if a.countdown == 0 || b.countdown == 0 {
            let next = a.phase + 1;
            *a = PhaseClockFields {
                phase: next,
                countdown: params.c_max,
            };
            *b = *a;
            return ClockAdvance { a: true, b: true };
        }
        ClockAdvance::default()
    } else if a.phase < b.phase {
        a.phase = b.phase;
        a.countdown = params.c_max;
        ClockAdvance { a: true, b: false }
    } else {
        b.phase = a.phase;
        b.countdown = params.c_max;
        ClockAdvance { a: false, b: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock(phase: u64, countdown: u32) -> PhaseClockFields {
        PhaseClockFields { phase, countdown }
    }

    #[test]
    fn same_phase_counts_down() {
        let p = Params::new(20).unwrap();
        let (mut a, mut b) = (clock(5, 3), clock(5, 9));
        let adv = phase_clock_step(&mut a, &mut b, &p);
        assert_eq!((a, b), (clock(5, 2), clock(5, 8)));
        assert_eq!(adv, ClockAdvance::default());
    }

    #[test]
    fn expiring_countdown_advances_both() {
        let p = Params::new(20).unwrap();
        let (mut a, mut b) = (clock(5, 1), clock(5, 4));
        let adv = phase_clock_step(&mut a, &mut b, &p);
        assert_eq!((a, b), (clock(6, p.c_max), clock(6, p.c_max)));
        assert_eq!(adv, ClockAdvance { a: true, b: true });
    }

    #[test]
    fn laggard_catches_up() {
        let p = Params::new(20).unwrap();
        let (mut a, mut b) = (clock(2, 4), clock(7, 4));
        let adv = phase_clock_step(&mut a, &mut b, &p);
        assert_eq!((a, b), (clock(7, p.c_max), clock(7, 4)));
        assert_eq!(adv, ClockAdvance { a: true, b: false });
        let (mut a, mut b) = (clock(9, 1), clock(7, 4));
        let adv = phase_clock_step(&mut a, &mut b, &p);
        assert_eq!((a, b), (clock(9, 1), clock(9, p.c_max)));
        assert_eq!(adv, ClockAdvance { a: false, b: true });
    }
}
