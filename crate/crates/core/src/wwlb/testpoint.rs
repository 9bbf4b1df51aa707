use crate::error::{Error, Result};

/// How a test point is tagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestPointKind {
    /// State-dependent map with every target inside the state set.
    Map { bijective: bool },
    /// The same integer offset for every state; out-of-range targets carry probability zero.
    Shift,
}

/// Which shift stands for "−h" in the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Negation {
    /// Inverse map `σ⁻¹(x) − x` for bijections, `−h` for fixed shifts.
    #[default]
    Reverse,
    /// Offsets negated state by state, `x − h(x)`.
    Literal,
}

/// Per-state offset `h(x)`, so that the shifted state is `x + h(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPoint {
    offsets: Vec<i64>,
    kind: TestPointKind,
}

impl TestPoint {
    /// State-dependent map; every target must lie in the state set and some offset must be nonzero.
    pub fn map(offsets: Vec<i64>) -> Result<Self> {
        let n = offsets.len() as i64;
        if offsets.iter().enumerate().any(|(x, h)| !(0..n).contains(&(x as i64 + h))) {
            return Err(Error::InvalidScenario(format!("test point {offsets:?} leaves the state set")));
        }
        if offsets.iter().all(|&h| h == 0) {
            return Err(Error::InvalidScenario("the zero map is not a test point".into()));
        }
        let mut hit = vec![false; offsets.len()];
        for (x, h) in offsets.iter().enumerate() {
            hit[(x as i64 + h) as usize] = true;
        }
        let bijective = hit.iter().all(|&b| b);
        Ok(Self { offsets, kind: TestPointKind::Map { bijective } })
    }

    /// Map induced by a permutation `x ↦ perm[x]`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        Self::map(perm.iter().enumerate().map(|(x, &t)| t as i64 - x as i64).collect())
    }

    /// Constant offset `h` for all `n` states.
    pub fn shift(n: usize, h: i64) -> Result<Self> {
        if h == 0 || h.unsigned_abs() as usize >= n {
            return Err(Error::InvalidScenario(format!("shift {h} must satisfy 0 < |h| < {n}")));
        }
        Ok(Self { offsets: vec![h; n], kind: TestPointKind::Shift })
    }

    /// The zero offset, used for the `0` arguments of the log terms.
    pub fn zero(n: usize) -> Self {
        Self { offsets: vec![0; n], kind: TestPointKind::Map { bijective: true } }
    }

    /// Arbitrary offsets without validity checks (targets outside the state set have probability zero).
    pub fn raw(offsets: Vec<i64>) -> Self {
        Self { offsets, kind: TestPointKind::Shift }
    }

    pub fn n(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn kind(&self) -> TestPointKind {
        self.kind
    }

    pub fn is_bijective(&self) -> bool {
        matches!(self.kind, TestPointKind::Map { bijective: true })
    }

    /// Shifted state `x + h(x)`, if it lies in the state set.
    #[inline]
    pub fn target(&self, x: usize) -> Option<usize> {
        let t = x as i64 + self.offsets[x];
        if t >= 0 && (t as usize) < self.offsets.len() {
            Some(t as usize)
        } else {
            None
        }
    }

    /// The counterpart used for "−h".
    pub fn negate(&self, convention: Negation) -> Self {
        match (convention, self.kind) {
            (Negation::Reverse, TestPointKind::Map { bijective: true }) => {
                let n = self.n();
                let mut inv = vec![0i64; n];
                for x in 0..n {
                    let t = self.target(x).expect("bijective map");
                    inv[t] = x as i64 - t as i64;
                }
                Self { offsets: inv, kind: self.kind }
            }
            _ => Self { offsets: self.offsets.iter().map(|h| -h).collect(), kind: TestPointKind::Shift },
        }
    }

    /// Compact label such as `perm:1,0` or `shift:+1`.
    pub fn label(&self) -> String {
        match self.kind {
            TestPointKind::Shift if self.offsets.iter().all(|&h| h == self.offsets[0]) => {
                format!("shift:{:+}", self.offsets[0])
            }
            TestPointKind::Shift => format!(
                "raw:{}",
                self.offsets.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")
            ),
            TestPointKind::Map { bijective: true } => format!(
                "perm:{}",
                (0..self.n()).map(|x| self.target(x).unwrap().to_string()).collect::<Vec<_>>().join(",")
            ),
            TestPointKind::Map { bijective: false } => format!(
                "map:{}",
                (0..self.n()).map(|x| self.target(x).unwrap().to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Which test points to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestPointSet {
    /// Non-identity permutations.
    Permutations,
    /// Fixed shifts `±1 … ±(n−1)`.
    Shifts,
    /// Both of the above.
    All,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Enumerate test points for `n` states.
pub fn enumerate_test_points(n: usize, set: TestPointSet) -> Vec<TestPoint> {
    let mut out = Vec::new();
    if matches!(set, TestPointSet::Permutations | TestPointSet::All) {
        for p in permutations(n).into_iter().skip(1) {
            out.push(TestPoint::from_permutation(&p).expect("non-identity permutation"));
        }
    }
    if matches!(set, TestPointSet::Shifts | TestPointSet::All) {
        for h in 1..n as i64 {
            out.push(TestPoint::shift(n, h).expect("valid shift"));
            out.push(TestPoint::shift(n, -h).expect("valid shift"));
        }
    }
    out
}
