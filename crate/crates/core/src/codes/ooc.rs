use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Codeword;
use crate::{Error, Result};

/// An (L, w, alpha) optical orthogonal code: one base word per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OocCode {
    length: usize,
    weight: usize,
    alpha: usize,
    words: Vec<Codeword>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OocViolation {
    /// Word has the wrong length or weight.
    Shape { word: usize, length: usize, weight: usize },
    /// Out-of-phase autocorrelation above alpha.
    Auto { word: usize, shift: usize, observed: usize },
    /// Cross-correlation above alpha at some relative shift.
    Cross { a: usize, b: usize, shift: usize, observed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OocReport {
    pub violations: Vec<OocViolation>,
}

impl OocReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl OocCode {
    pub fn new(length: usize, weight: usize, alpha: usize, words: Vec<Codeword>) -> Result<Self> {
        if length == 0 || weight == 0 || weight > length {
            return Err(Error::InvalidParameter(alloc::format!(
                "OOC parameters ({length},{weight},{alpha}) need 1 <= w <= L"
            )));
        }
        Ok(Self {
            length,
            weight,
            alpha,
            words,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Exhaustive correlation check over all shifts and word pairs.
    pub fn verify(&self) -> OocReport {
        let mut violations = Vec::new();
        let mut well_formed = Vec::with_capacity(self.words.len());
        for (i, word) in self.words.iter().enumerate() {
            let ok = word.len() == self.length && word.weight() == self.weight;
            if !ok {
                violations.push(OocViolation::Shape {
                    word: i,
                    length: word.len(),
                    weight: word.weight(),
                });
            }
            well_formed.push(ok);
        }
        for (i, word) in self.words.iter().enumerate() {
            if !well_formed[i] {
                continue;
            }
            for shift in 1..self.length {
                let observed = word.correlation(&word.cyclic_shift(shift)).expect("same length");
                if observed > self.alpha {
                    violations.push(OocViolation::Auto { word: i, shift, observed });
                }
            }
            for (j, other) in self.words.iter().enumerate().skip(i + 1) {
                if !well_formed[j] {
                    continue;
                }
                for shift in 0..self.length {
                    let observed = word.correlation(&other.cyclic_shift(shift)).expect("same length");
                    if observed > self.alpha {
                        violations.push(OocViolation::Cross { a: i, b: j, shift, observed });
                    }
                }
            }
        }
        OocReport { violations }
    }
}

/// Nested-floor Johnson bound on the number of (L, w, alpha) codewords.
///
/// Single-pulse codes (`w = 1`) are a special case: the only distinct words
/// are the `L` rotations of one pulse.
pub fn johnson_bound(length: usize, weight: usize, alpha: usize) -> Result<u64> {
    if weight == 1 && length >= 1 {
        return Ok(length as u64);
    }
    if alpha < 1 || alpha >= weight || weight > length {
        return Err(Error::InvalidParameter(alloc::format!(
            "Johnson bound needs 1 <= alpha < w <= L, got ({length},{weight},{alpha})"
        )));
    }
    let (l, w) = (length as u64, weight as u64);
    let mut acc = 1u64;
    for i in (1..=alpha as u64).rev() {
        acc = (l - i) * acc / (w - i);
    }
    Ok(acc / w)
}

/// Tuning knobs for [`search_ooc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    /// Full restarts before giving up.
    pub restarts: usize,
    /// Backtracking nodes allowed per attempted word.
    pub node_budget: usize,
    /// Single-pulse moves for the local search that takes over when greedy
    /// construction stalls; zero disables it.
    pub local_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 64,
            node_budget: 20_000,
            local_steps: 0,
        }
    }
}

/// Incremental correlation bookkeeping for the word under construction.
struct Builder<'a> {
    length: usize,
    alpha: u16,
    placed: &'a [Vec<usize>],
    current: Vec<usize>,
    auto: Vec<u16>,
    cross: Vec<Vec<u16>>,
}

impl<'a> Builder<'a> {
    fn new(length: usize, alpha: usize, placed: &'a [Vec<usize>]) -> Self {
        Self {
            length,
            alpha: alpha as u16,
            placed,
            current: Vec::new(),
            auto: vec![0; length],
            cross: vec![vec![0; length]; placed.len()],
        }
    }

    fn diff(&self, a: usize, b: usize) -> usize {
        (a + self.length - b) % self.length
    }

    /// Adds `x` if every correlation stays within alpha.
    fn try_push(&mut self, x: usize) -> bool {
        if self.current.contains(&x) {
            return false;
        }
        // Differences x - b against one placed word are distinct, so each
        // cross count moves by at most one.
        for (w, word) in self.placed.iter().enumerate() {
            for &b in word {
                if self.cross[w][self.diff(x, b)] + 1 > self.alpha {
                    return false;
                }
            }
        }
        // Auto increments can collide (x - p1 = p2 - x), so apply then check.
        for i in 0..self.current.len() {
            let p = self.current[i];
            let (t1, t2) = (self.diff(x, p), self.diff(p, x));
            self.auto[t1] += 1;
            self.auto[t2] += 1;
        }
        let over = self
            .current
            .iter()
            .any(|&p| self.auto[self.diff(x, p)] > self.alpha || self.auto[self.diff(p, x)] > self.alpha);
        if over {
            for i in 0..self.current.len() {
                let p = self.current[i];
                let (t1, t2) = (self.diff(x, p), self.diff(p, x));
                self.auto[t1] -= 1;
                self.auto[t2] -= 1;
            }
            return false;
        }
        for w in 0..self.placed.len() {
            for i in 0..self.placed[w].len() {
                let t = self.diff(x, self.placed[w][i]);
                self.cross[w][t] += 1;
            }
        }
        self.current.push(x);
        true
    }

    fn pop(&mut self) {
        let x = self.current.pop().expect("non-empty");
        for i in 0..self.current.len() {
            let p = self.current[i];
            let (t1, t2) = (self.diff(x, p), self.diff(p, x));
            self.auto[t1] -= 1;
            self.auto[t2] -= 1;
        }
        for w in 0..self.placed.len() {
            for i in 0..self.placed[w].len() {
                let t = self.diff(x, self.placed[w][i]);
                self.cross[w][t] -= 1;
            }
        }
    }
}

/// Depth-first completion of one word; candidates are tried in a random
/// order at each depth. Returns `None` if the node budget runs out.
fn find_word(
    length: usize,
    weight: usize,
    alpha: usize,
    placed: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Option<Vec<usize>> {
    let mut builder = Builder::new(length, alpha, placed);
    // Rotations are interchangeable, so every word starts at slot 0.
    builder.try_push(0).then_some(())?;
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut cursor: Vec<usize> = Vec::new();
    let mut nodes = 0usize;
    let fresh = |rng: &mut ChaCha8Rng| {
        let mut c: Vec<usize> = (1..length).collect();
        c.shuffle(rng);
        c
    };
    candidates.push(fresh(rng));
    cursor.push(0);
    while builder.current.len() < weight {
        let depth = candidates.len() - 1;
        if cursor[depth] >= candidates[depth].len() {
            candidates.pop();
            cursor.pop();
            if candidates.is_empty() {
                return None;
            }
            builder.pop();
            continue;
        }
        let x = candidates[depth][cursor[depth]];
        cursor[depth] += 1;
        nodes += 1;
        if nodes > budget {
            return None;
        }
        if builder.try_push(x) {
            if builder.current.len() == weight {
                break;
            }
            candidates.push(fresh(rng));
            cursor.push(0);
        }
    }
    let mut word = builder.current;
    word.sort_unstable();
    Some(word)
}

/// Greedy word-by-word OOC search with per-word backtracking and seeded
/// restarts. Deterministic for fixed options.
pub fn search_ooc(
    length: usize,
    weight: usize,
    alpha: usize,
    count: usize,
    options: SearchOptions,
) -> Result<OocCode> {
    let bound = johnson_bound(length, weight, alpha)?;
    if count as u64 > bound {
        return Err(Error::JohnsonBoundExceeded { requested: count, bound });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best = 0;
    for _ in 0..options.restarts.max(1) {
        let mut placed: Vec<Vec<usize>> = Vec::with_capacity(count);
        while placed.len() < count {
            match find_word(length, weight, alpha, &placed, &mut rng, options.node_budget) {
                Some(word) => placed.push(word),
                None => break,
            }
        }
        best = best.max(placed.len());
        if placed.len() == count {
            let words = placed
                .iter()
                .map(|p| Codeword::from_positions(length, p))
                .collect::<Result<Vec<_>>>()?;
            return OocCode::new(length, weight, alpha, words);
        }
    }
    if options.local_steps > 0 {
        if let Some(placed) = local_search(length, weight, alpha, count, &mut rng, options.local_steps) {
            let words = placed
                .iter()
                .map(|p| {
                    let lowest = p[0];
                    Codeword::from_positions(length, &p.iter().map(|&x| x + length - lowest).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            return OocCode::new(length, weight, alpha, words);
        }
    }
    Err(Error::SearchExhausted { requested: count, found: best })
}

/// Correlation counts of a whole candidate code and their excess over alpha.
struct Tally {
    length: usize,
    alpha: u16,
    words: Vec<Vec<usize>>,
    /// `auto[a][s]`: ordered pulse pairs of word `a` at distance `s`.
    auto: Vec<Vec<u16>>,
    /// `cross[a][b - a][s]` for `a < b`: pairs `(x in a, y in b)` with `y - x = s`.
    cross: Vec<Vec<Vec<u16>>>,
    excess: usize,
    /// Excess each word takes part in.
    word_excess: Vec<usize>,
}

impl Tally {
    fn new(length: usize, alpha: usize, words: Vec<Vec<usize>>) -> Self {
        let n = words.len();
        let mut t = Self {
            length,
            alpha: alpha as u16,
            auto: vec![vec![0; length]; n],
            cross: (0..n).map(|a| vec![vec![0; length]; n - a]).collect(),
            words: vec![Vec::new(); n],
            excess: 0,
            word_excess: vec![0; n],
        };
        for (a, word) in words.into_iter().enumerate() {
            for x in word {
                t.add(a, x);
            }
        }
        t
    }

    fn bump(&mut self, a: usize, b: usize, s: usize, up: bool) {
        let alpha = self.alpha;
        let c = if a == b {
            &mut self.auto[a][s]
        } else {
            &mut self.cross[a][b - a][s]
        };
        let changed = if up {
            *c += 1;
            *c > alpha
        } else {
            *c -= 1;
            *c >= alpha
        };
        if changed {
            let apply = |v: &mut usize| if up { *v += 1 } else { *v -= 1 };
            apply(&mut self.excess);
            apply(&mut self.word_excess[a]);
            if a != b {
                apply(&mut self.word_excess[b]);
            }
        }
    }

    fn touch(&mut self, a: usize, x: usize, up: bool) {
        let l = self.length;
        for i in 0..self.words[a].len() {
            let p = self.words[a][i];
            self.bump(a, a, (x + l - p) % l, up);
            self.bump(a, a, (p + l - x) % l, up);
        }
        for b in 0..self.words.len() {
            if b == a {
                continue;
            }
            for i in 0..self.words[b].len() {
                let y = self.words[b][i];
                if a < b {
                    self.bump(a, b, (y + l - x) % l, up);
                } else {
                    self.bump(b, a, (x + l - y) % l, up);
                }
            }
        }
    }

    fn add(&mut self, a: usize, x: usize) {
        self.touch(a, x, true);
        self.words[a].push(x);
    }

    fn remove(&mut self, a: usize, i: usize) -> usize {
        let x = self.words[a].swap_remove(i);
        self.touch(a, x, false);
        x
    }
}

/// Min-conflicts search over whole codes: repeatedly move one pulse of a
/// word involved in a violation to the best free slot, with a short tabu
/// list and occasional random moves.
fn local_search(
    length: usize,
    weight: usize,
    alpha: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
    steps: usize,
) -> Option<Vec<Vec<usize>>> {
    if weight == 0 || weight > length || count == 0 {
        return None;
    }
    let words = (0..count)
        .map(|_| {
            let mut all: Vec<usize> = (0..length).collect();
            all.shuffle(rng);
            all.truncate(weight);
            all
        })
        .collect();
    let mut t = Tally::new(length, alpha, words);
    let mut tabu = vec![vec![0usize; length]; count];
    let mut candidates = Vec::with_capacity(length);
    for step in 1..=steps {
        if t.excess == 0 {
            let mut words = t.words;
            for w in &mut words {
                w.sort_unstable();
            }
            return Some(words);
        }
        let conflicted: Vec<usize> = (0..count).filter(|&a| t.word_excess[a] > 0).collect();
        let a = conflicted[rng.random_range(0..conflicted.len())];
        let before = t.excess as i64;
        let x = t.remove(a, rng.random_range(0..weight));
        let target = if rng.random::<f64>() < 0.02 {
            loop {
                let y = rng.random_range(0..length);
                if !t.words[a].contains(&y) {
                    break y;
                }
            }
        } else {
            candidates.clear();
            let mut best = i64::MAX;
            for y in 0..length {
                if t.words[a].contains(&y) || (y != x && tabu[a][y] > step) {
                    continue;
                }
                t.add(a, y);
                let delta = t.excess as i64 - before;
                let last = t.words[a].len() - 1;
                t.remove(a, last);
                if delta < best {
                    best = delta;
                    candidates.clear();
                }
                if delta == best {
                    candidates.push(y);
                }
            }
            candidates[rng.random_range(0..candidates.len())]
        };
        t.add(a, target);
        if target != x {
            tabu[a][x] = step + 10 + rng.random_range(0..10);
        }
    }
    None
}

/// Cyclotomic OOC over a prime length: word `r` is the coset `g^r H` of the
/// order-`order` multiplicative subgroup `H`, optionally with slot 0 added.
/// Yields `(p - 1) / order` words; `alpha` is the largest correlation found.
pub fn cyclotomic_ooc(prime: usize, order: usize, with_zero: bool) -> Result<OocCode> {
    if prime < 3 || (2..prime).take_while(|d| d * d <= prime).any(|d| prime % d == 0) {
        return Err(Error::NotPrime(prime as u32));
    }
    if order == 0 || (prime - 1) % order != 0 || order == prime - 1 {
        return Err(Error::InvalidParameter(alloc::format!(
            "subgroup order {order} must be a proper divisor of {}",
            prime - 1
        )));
    }
    let p = prime as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let factors: Vec<u64> = (2..p).filter(|&f| (p - 1) % f == 0 && (2..f).all(|d| f % d != 0)).collect();
    let g = (2..p)
        .find(|&g| factors.iter().all(|&f| pow(g, (p - 1) / f) != 1))
        .expect("a prime modulus has a primitive root");
    let cosets = (p - 1) / order as u64;
    let subgroup: Vec<u64> = (0..order as u64).map(|i| pow(g, cosets * i)).collect();
    let words = (0..cosets)
        .map(|r| {
            let rep = pow(g, r);
            let mut positions: Vec<usize> = subgroup.iter().map(|&h| (rep * h % p) as usize).collect();
            if with_zero {
                positions.push(0);
            }
            Codeword::from_positions(prime, &positions)
        })
        .collect::<Result<Vec<_>>>()?;
    let weight = order + with_zero as usize;
    let mut alpha = 0;
    for (i, a) in words.iter().enumerate() {
        for (j, b) in words.iter().enumerate().skip(i) {
            for s in 0..prime {
                if i == j && s == 0 {
                    continue;
                }
                alpha = alpha.max(a.correlation(&b.cyclic_shift(s))?);
            }
        }
    }
    OocCode::new(prime, weight, alpha, words)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: evaluate the nested floors exactly as printed,
    /// innermost first, with plain integer division at every level.
    fn nested_floor_oracle(l: u64, w: u64, alpha: u64) -> u64 {
        let mut inner = 1u64;
        let mut i = alpha;
        while i >= 1 {
            inner = ((l - i) as f64 / (w - i) as f64 * inner as f64).floor() as u64;
            i -= 1;
        }
        (inner as f64 / w as f64).floor() as u64
    }

    #[test]
    fn johnson_bound_values() {
        assert_eq!(johnson_bound(341, 5, 1).unwrap(), 17);
        assert_eq!(johnson_bound(13, 3, 1).unwrap(), 2);
        assert_eq!(johnson_bound(7, 3, 1).unwrap(), 1);
        assert_eq!(johnson_bound(50, 1, 0).unwrap(), 50);
        assert_eq!(johnson_bound(63, 7, 2).unwrap(), 17);
        assert!(johnson_bound(13, 3, 3).is_err());
        assert!(johnson_bound(13, 3, 0).is_err());
        assert!(johnson_bound(3, 5, 1).is_err());
    }

    #[test]
    fn johnson_bound_matches_oracle_grid() {
        for l in [13u64, 31, 63, 101, 341] {
            for w in 2..=9u64 {
                for alpha in 1..w.min(4) {
                    if w > l {
                        continue;
                    }
                    assert_eq!(
                        johnson_bound(l as usize, w as usize, alpha as usize).unwrap(),
                        nested_floor_oracle(l, w, alpha),
                        "({l},{w},{alpha})"
                    );
                }
            }
        }
    }

    #[test]
    fn figure_word_is_a_valid_one_word_code() {
        let word = Codeword::parse("1100100000000").unwrap();
        let code = OocCode::new(13, 3, 1, alloc::vec![word]).unwrap();
        assert!(code.verify().passed());
    }

    #[test]
    fn duplicate_words_fail_at_zero_shift() {
        let word = Codeword::parse("1100100000000").unwrap();
        let code = OocCode::new(13, 3, 1, alloc::vec![word.clone(), word]).unwrap();
        let report = code.verify();
        assert!(report
            .violations
            .contains(&OocViolation::Cross { a: 0, b: 1, shift: 0, observed: 3 }));
    }

    #[test]
    fn zero_word_fails_weight_check() {
        let code = OocCode::new(13, 3, 1, alloc::vec![Codeword::zeros(13).unwrap()]).unwrap();
        assert!(matches!(code.verify().violations[0], OocViolation::Shape { weight: 0, .. }));
    }

    #[test]
    fn search_small_codes() {
        let code = search_ooc(13, 3, 1, 1, SearchOptions::default()).unwrap();
        assert_eq!(code.len(), 1);
        assert!(code.verify().passed());
        let code = search_ooc(13, 3, 1, 2, SearchOptions::default()).unwrap();
        assert!(code.verify().passed());
        assert!(search_ooc(7, 3, 1, 1, SearchOptions::default()).unwrap().verify().passed());
    }

    #[test]
    fn search_rejects_requests_above_bound() {
        assert_eq!(
            search_ooc(7, 3, 1, 2, SearchOptions::default()),
            Err(Error::JohnsonBoundExceeded { requested: 2, bound: 1 })
        );
    }

    #[test]
    fn search_is_deterministic() {
        let opts = SearchOptions { seed: 9, ..SearchOptions::default() };
        assert_eq!(search_ooc(63, 4, 1, 4, opts), search_ooc(63, 4, 1, 4, opts));
    }

    #[test]
    fn exhaustive_seven_three_one_has_exactly_one_class() {
        // Every weight-3 word of length 7 with 0 in it either violates the
        // autocorrelation bound or is a rotation of one of the two
        // perfect-difference words; no two of them are cross-compatible.
        let mut valid = Vec::new();
        for a in 1..7 {
            for b in a + 1..7 {
                let word = Codeword::from_positions(7, &[0, a, b]).unwrap();
                if OocCode::new(7, 3, 1, alloc::vec![word.clone()]).unwrap().verify().passed() {
                    valid.push(word);
                }
            }
        }
        assert!(!valid.is_empty());
        for x in &valid {
            for y in &valid {
                let pair = OocCode::new(7, 3, 1, alloc::vec![x.clone(), y.clone()]).unwrap();
                assert!(!pair.verify().passed());
            }
        }
    }

    #[test]
    fn cyclotomic_codes_verify() {
        let code = cyclotomic_ooc(101, 10, true).unwrap();
        assert_eq!((code.len(), code.weight(), code.alpha()), (10, 11, 3));
        assert!(code.verify().passed());
        let code = cyclotomic_ooc(101, 5, false).unwrap();
        assert_eq!((code.len(), code.weight(), code.alpha()), (20, 5, 2));
        assert!(code.verify().passed());
        assert!(cyclotomic_ooc(100, 5, false).is_err());
        assert!(cyclotomic_ooc(101, 7, false).is_err());
    }

    #[test]
    fn local_search_takes_over() {
        let opts = SearchOptions {
            seed: 3,
            restarts: 1,
            node_budget: 10,
            local_steps: 20_000,
        };
        let code = search_ooc(63, 7, 3, 12, opts).unwrap();
        assert_eq!(code.len(), 12);
        assert!(code.verify().passed());
    }
}
