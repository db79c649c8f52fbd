//! Binary-search state machine over half-integer guesses.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-integer `k + 1/2`, stored as `2k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    /// `floor + 1/2`
    pub fn above(floor: i64) -> Self {
        HalfInt(2 * floor + 1)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn floor(self) -> i64 {
        Integer::div_floor(&self.0, &2)
    }

    pub fn round_half_up(self) -> i64 {
        self.floor() + 1
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        write!(f, "{sign}{}.5", (self.0.abs() - 1) / 2)
    }
}

/// Rounds `(a + b) / 2` with ties going up.
pub fn midpoint_half_up(a: i64, b: i64) -> i64 {
    Integer::div_floor(&(a + b + 1), &2)
}

/// Which order statistic to search for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// Plain median aggregation: midpoint guesses and no count offset.
    Median,
    /// The `k`-th smallest element (1-based), with a rank-proportional first guess and
    /// offset `2k - N`.
    Rank(usize),
}

impl Target {
    /// `k = ⌈p·N/100⌉`, at least 1.
    pub fn percentile(p: f64, n: usize) -> Result<Self> {
        if !(p > 0.0 && p < 100.0) {
            return Err(Error::InvalidParameter(format!(
                "percentile {p} outside (0, 100)"
            )));
        }
        let k = ((p * n as f64) / 100.0).ceil() as usize;
        Ok(Target::Rank(k.clamp(1, n.max(1))))
    }

    /// 1-based rank of the value the search converges to.
    pub fn rank(self, n: usize) -> usize {
        match self {
            Target::Median => n.div_ceil(2).max(1),
            Target::Rank(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchState {
    pub low: i64,
    pub high: i64,
    pub alpha: i64,
    pub beta: i64,
    /// Rounds completed so far.
    pub round: u32,
    pub guess: HalfInt,
    pub tolerance: u64,
    pub target: Target,
    pub users: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Continue(SearchState),
    Done(i64),
}

fn clamp_guess(floor: i64, alpha: i64, beta: i64) -> HalfInt {
    HalfInt::above(floor.clamp(alpha, (beta - 1).max(alpha)))
}

impl SearchState {
    pub fn new(low: i64, high: i64, target: Target, users: usize, tolerance: u64) -> Result<Self> {
        if low >= high {
            return Err(Error::InvalidParameter(format!(
                "empty range [{low}, {high}]"
            )));
        }
        if users == 0 {
            return Err(Error::InvalidParameter("no users".into()));
        }
        if let Target::Rank(k) = target {
            if k == 0 || k > users {
                return Err(Error::InvalidParameter(format!(
                    "rank {k} outside 1..={users}"
                )));
            }
        }
        let mut state = SearchState {
            low,
            high,
            alpha: low,
            beta: high,
            round: 0,
            guess: HalfInt::above(low),
            tolerance,
            target,
            users,
        };
        state.guess = state.guess_next();
        Ok(state)
    }

    /// Starts from a narrowed range `[alpha, beta] ⊆ [low, high]` with first guess
    /// `⌊start⌋ + 1/2`.
    pub fn with_range(mut self, alpha: i64, beta: i64, start: i64) -> Result<Self> {
        if !(self.low <= alpha && alpha < beta && beta <= self.high) {
            return Err(Error::InvalidParameter(format!(
                "[{alpha}, {beta}] not inside the range"
            )));
        }
        self.alpha = alpha;
        self.beta = beta;
        self.guess = clamp_guess(start, alpha, beta);
        Ok(self)
    }

    /// Offset added to the sign sum: `2k - N`, or 0 for plain median aggregation.
    pub fn offset(&self) -> i64 {
        match self.target {
            Target::Median => 0,
            Target::Rank(k) => 2 * k as i64 - self.users as i64,
        }
    }

    /// Guess for the upcoming round.
    pub fn guess_next(&self) -> HalfInt {
        match self.target {
            Target::Rank(k) if self.round == 0 => {
                let width = (self.high - self.low) as i128;
                let floor = Integer::div_floor(&(width * k as i128), &(self.users as i128)) as i64
                    + self.low;
                clamp_guess(floor, self.alpha, self.beta)
            }
            _ => HalfInt::above(Integer::div_floor(&(self.alpha + self.beta), &2)),
        }
    }

    /// Applies the round's aggregate `z`.
    pub fn update(&self, z: i64) -> Step {
        if z.unsigned_abs() <= self.tolerance {
            return Step::Done(self.guess.round_half_up());
        }
        let mut next = self.clone();
        next.round += 1;
        if z > 0 {
            next.alpha = self.guess.floor();
        } else {
            next.beta = self.guess.floor();
        }
        if next.beta - next.alpha <= 2 {
            return Step::Done(midpoint_half_up(next.alpha, next.beta));
        }
        next.guess = next.guess_next();
        Step::Continue(next)
    }

    /// The current guess followed by the guesses of the next `depth` rounds, level by
    /// level, assuming no early termination.
    pub fn speculative_guesses(&self, depth: u32) -> Vec<HalfInt> {
        let mut out = vec![self.guess];
        let mut level = vec![self.clone()];
        for _ in 0..depth {
            let mut next_level = Vec::new();
            for s in &level {
                for z in [-1i64, 1] {
                    let probe = SearchState {
                        tolerance: 0,
                        ..s.clone()
                    };
                    if let Step::Continue(child) = probe.update(z) {
                        out.push(child.guess);
                        next_level.push(SearchState {
                            tolerance: s.tolerance,
                            ..child
                        });
                    }
                }
            }
            level = next_level;
        }
        out
    }
}

/// `⌈log2(width)⌉ - 1`, the most rounds a midpoint search over a range of this width uses.
pub fn round_bound(width: u64) -> u32 {
    let log = 64 - (width.max(1) - 1).leading_zeros();
    log.saturating_sub(1).max(1)
}
