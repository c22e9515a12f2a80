//! Strict preference orders over outcomes, rank vectors, the C0/C22
//! conditions and enumeration of all preference profiles.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::game::{OutcomeId, OutcomeKind, OutcomeSet, Player};
use crate::CapExceeded;

/// Default bound on the number of enumerated preference profiles.
pub const DEFAULT_PROFILE_CAP: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreferenceError {
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("outcome id {0} is out of range")]
    OutcomeOutOfRange(OutcomeId),
    #[error("order is not a permutation of the {expected} outcomes")]
    NotAPermutation { expected: usize },
    #[error("scores {0} and {1} are tied")]
    TiedScores(usize, usize),
    #[error("score {0} is not a number")]
    NotANumber(usize),
    #[error("preferences disagree on the number of outcomes")]
    MismatchedOutcomeCounts,
    #[error("expected {expected} player preferences, got {got}")]
    WrongPlayerCount { expected: usize, got: usize },
    #[error("the outcome set has no cyclic outcomes to merge")]
    NoCyclicOutcomes,
}

/// A strict total order over outcome ids `0..k`, best first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preference {
    order: Vec<OutcomeId>,
    rank: Vec<usize>,
}

impl Preference {
    pub fn from_order(order: Vec<OutcomeId>) -> Result<Self, PreferenceError> {
        let k = order.len();
        let mut rank = vec![usize::MAX; k];
        for (r, &o) in order.iter().enumerate() {
            if o >= k || rank[o] != usize::MAX {
                return Err(PreferenceError::NotAPermutation { expected: k });
            }
            rank[o] = r;
        }
        Ok(Preference { order, rank })
    }

    /// Order given by outcome labels, best first.
    pub fn from_labels<S: AsRef<str>>(os: &OutcomeSet, labels: &[S]) -> Result<Self, PreferenceError> {
        let order = labels
            .iter()
            .map(|l| {
                os.find(l.as_ref())
                    .ok_or_else(|| PreferenceError::UnknownOutcome(l.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if order.len() != os.len() {
            return Err(PreferenceError::NotAPermutation { expected: os.len() });
        }
        Self::from_order(order)
    }

    /// Order induced by tie-free scores (higher is better), one per outcome.
    pub fn from_scores(scores: &[f64]) -> Result<Self, PreferenceError> {
        if let Some(i) = scores.iter().position(|s| s.is_nan()) {
            return Err(PreferenceError::NotANumber(i));
        }
        let mut order: Vec<OutcomeId> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));
        if let Some(w) = order.windows(2).find(|w| scores[w[0]] == scores[w[1]]) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(PreferenceError::TiedScores(a, b));
        }
        Self::from_order(order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Outcomes, best first.
    pub fn order(&self) -> &[OutcomeId] {
        &self.order
    }

    /// Position of `o` in the order (0 = best).
    pub fn rank(&self, o: OutcomeId) -> usize {
        self.rank[o]
    }

    /// Whether `a` is strictly preferred to `b`. Panics on ids out of range.
    pub fn better(&self, a: OutcomeId, b: OutcomeId) -> bool {
        self.rank[a] < self.rank[b]
    }

    pub fn prefers(&self, a: OutcomeId, b: OutcomeId) -> Result<bool, PreferenceError> {
        for o in [a, b] {
            if o >= self.len() {
                return Err(PreferenceError::OutcomeOutOfRange(o));
            }
        }
        Ok(self.better(a, b))
    }

    /// Label-based [`Preference::prefers`].
    pub fn prefers_labels(&self, os: &OutcomeSet, a: &str, b: &str) -> Result<bool, PreferenceError> {
        let find = |l: &str| os.find(l).ok_or_else(|| PreferenceError::UnknownOutcome(l.to_string()));
        self.prefers(find(a)?, find(b)?)
    }

    /// Lifts an order over a coarser outcome set back to the finer one.
    ///
    /// `map[o]` is the coarse outcome containing fine outcome `o`. Fine
    /// outcomes sharing a coarse outcome form a contiguous block, ordered
    /// as they appear in `within`.
    pub fn lift(&self, map: &[OutcomeId], within: &[OutcomeId]) -> Preference {
        let order = self
            .order
            .iter()
            .flat_map(|&coarse| within.iter().copied().filter(move |&o| map[o] == coarse))
            .collect();
        Preference::from_order(order).expect("lifting a permutation yields a permutation")
    }

    /// `a2 > c3 > c2 > a1 > c1`
    pub fn display<'a>(&'a self, os: &'a OutcomeSet) -> impl fmt::Display + 'a {
        DisplayPreference { p: self, os }
    }
}

struct DisplayPreference<'a> {
    p: &'a Preference,
    os: &'a OutcomeSet,
}

impl fmt::Display for DisplayPreference<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &o) in self.p.order.iter().enumerate() {
            if i > 0 {
                f.write_str(" > ")?;
            }
            f.write_str(self.os.label(o))?;
        }
        Ok(())
    }
}

/// One strict order per player, all over the same outcome set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceProfile {
    prefs: Vec<Preference>,
}

impl PreferenceProfile {
    pub fn new(prefs: Vec<Preference>) -> Result<Self, PreferenceError> {
        if prefs.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(PreferenceError::MismatchedOutcomeCounts);
        }
        Ok(PreferenceProfile { prefs })
    }

    /// Builds a profile from label orders, checking it covers `players`.
    pub fn from_labels<S: AsRef<str>>(
        os: &OutcomeSet,
        players: usize,
        orders: &[Vec<S>],
    ) -> Result<Self, PreferenceError> {
        if orders.len() != players {
            return Err(PreferenceError::WrongPlayerCount {
                expected: players,
                got: orders.len(),
            });
        }
        let prefs = orders
            .iter()
            .map(|o| Preference::from_labels(os, o))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(prefs)
    }

    pub fn players(&self) -> usize {
        self.prefs.len()
    }

    pub fn outcomes(&self) -> usize {
        self.prefs.first().map_or(0, Preference::len)
    }

    pub fn get(&self, player: Player) -> &Preference {
        &self.prefs[player]
    }

    pub fn preferences(&self) -> &[Preference] {
        &self.prefs
    }

    /// One `i: w1 > w2 > ...` line per player, 1-based.
    pub fn display(&self, os: &OutcomeSet) -> String {
        self.prefs
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{}: {}", i + 1, p.display(os)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `r_i` = number of terminal outcomes beaten, for player `i`, by some
/// cyclic outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankVector(pub Vec<usize>);

impl fmt::Display for RankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

pub fn rank_vector(os: &OutcomeSet, pp: &PreferenceProfile) -> RankVector {
    let terminals = os.terminal_ids();
    let cyclic = os.cyclic_ids();
    RankVector(
        pp.preferences()
            .iter()
            .map(|p| {
                terminals
                    .iter()
                    .filter(|&&t| cyclic.iter().any(|&c| p.better(c, t)))
                    .count()
            })
            .collect(),
    )
}

/// Every terminal outcome beats every cyclic outcome, for every player.
pub fn cnd_c0(os: &OutcomeSet, pp: &PreferenceProfile) -> bool {
    rank_vector(os, pp).0.iter().all(|&r| r == 0)
}

/// At least two entries of the rank vector are at least 2.
pub fn cnd_c22(os: &OutcomeSet, pp: &PreferenceProfile) -> bool {
    rank_vector(os, pp).0.iter().filter(|&&r| r >= 2).count() >= 2
}

/// Collapses all cyclic outcomes into one outcome labeled `c`.
pub fn merge_cyclic(os: &OutcomeSet) -> Result<OutcomeSet, PreferenceError> {
    os.merged_cyclic().ok_or(PreferenceError::NoCyclicOutcomes)
}

/// Projects a profile over `os` onto a coarser outcome set.
///
/// Defined only when each player's order keeps merged outcomes contiguous;
/// returns `None` otherwise.
pub fn project_profile(
    pp: &PreferenceProfile,
    map: &[OutcomeId],
    coarse_len: usize,
) -> Option<PreferenceProfile> {
    let prefs = pp
        .preferences()
        .iter()
        .map(|p| {
            let mut order: Vec<OutcomeId> = Vec::with_capacity(coarse_len);
            for &o in p.order() {
                let c = map[o];
                if order.last() != Some(&c) {
                    if order.contains(&c) {
                        return None;
                    }
                    order.push(c);
                }
            }
            Preference::from_order(order).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    PreferenceProfile::new(prefs).ok()
}

fn factorial(k: usize) -> Option<usize> {
    (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i))
}

/// The `index`-th permutation of `0..k` in lexicographic order, decoded
/// from the factorial number system.
pub fn permutation_at(k: usize, mut index: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..k).collect();
    let mut out = Vec::with_capacity(k);
    for remaining in (1..=k).rev() {
        let block = factorial(remaining - 1).expect("k! fits in usize");
        out.push(pool.remove(index / block));
        index %= block;
    }
    out
}

/// All `(k!)^n` strict-order profiles, player 1 most significant, each
/// player's orders in lexicographic permutation order.
#[derive(Debug, Clone)]
pub struct ProfileEnumeration {
    outcomes: usize,
    players: usize,
    per_player: usize,
    total: usize,
}

impl ProfileEnumeration {
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// Orders per player, `k!`.
    pub fn per_player(&self) -> usize {
        self.per_player
    }

    pub fn profile(&self, mut index: usize) -> PreferenceProfile {
        let mut digits = vec![0; self.players];
        for d in digits.iter_mut().rev() {
            *d = index % self.per_player;
            index /= self.per_player;
        }
        let prefs = digits
            .into_iter()
            .map(|d| Preference::from_order(permutation_at(self.outcomes, d)).expect("permutation"))
            .collect();
        PreferenceProfile { prefs }
    }

    /// Profiles with indices in `range`, for splitting across workers.
    pub fn range(&self, range: Range<usize>) -> impl Iterator<Item = PreferenceProfile> + '_ {
        let end = range.end.min(self.total);
        (range.start..end).map(move |i| self.profile(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = PreferenceProfile> + '_ {
        self.range(0..self.total)
    }
}

pub fn enumerate_preference_profiles(
    outcomes: usize,
    players: usize,
    cap: usize,
) -> Result<ProfileEnumeration, CapExceeded> {
    let per_player = factorial(outcomes);
    let total = per_player.and_then(|f| (0..players).try_fold(1usize, |acc, _| acc.checked_mul(f)));
    match (per_player, total) {
        (Some(per_player), Some(total)) if total <= cap => Ok(ProfileEnumeration {
            outcomes,
            players,
            per_player,
            total,
        }),
        _ => Err(CapExceeded::new("preference profiles", total, cap)),
    }
}

/// Kind-aware summary used by reports: `terminal` or `cyclic`.
pub fn kind_name(kind: OutcomeKind) -> &'static str {
    match kind {
        OutcomeKind::Terminal => "terminal",
        OutcomeKind::Cyclic => "cyclic",
    }
}
