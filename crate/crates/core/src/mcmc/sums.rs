//! Exact prefix power sums over one boson's (centered) path.
//!
//! Cluster moves shift a run of slices by +-1. Because the potentials are
//! polynomials, the potential change over the run only needs `sum m`,
//! `sum m^2` and `sum m^3`, so a proposal costs `O(1)`. Accepted moves
//! rebuild the prefixes in `O(K)`; with low acceptance this is the cheaper
//! side of the trade.

/// Power sums of centered indices over a range of slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Moments {
    pub count: i64,
    pub sum: i64,
    pub sum_sq: i64,
    pub sum_cube: i64,
}

impl Moments {
    pub fn single(m: i64) -> Self {
        Moments {
            count: 1,
            sum: m,
            sum_sq: m * m,
            sum_cube: m * m * m,
        }
    }

    pub fn merge(self, other: Moments) -> Moments {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
            sum_cube: self.sum_cube + other.sum_cube,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathSums {
    values: Vec<i64>,
    // p_k[l] = sum of m^k over positions 0..l
    p1: Vec<i64>,
    p2: Vec<i64>,
    p3: Vec<i64>,
    // enclose every value, possibly loosely
    min: i64,
    max: i64,
}

impl PathSums {
    /// Values must satisfy `len * max|m|^3` well inside `i64`; callers bound
    /// `|m|` by the grid size.
    pub fn new(values: &[i64]) -> Self {
        assert!(!values.is_empty());
        let n = values.len();
        let (mut p1, mut p2, mut p3) = (vec![0; n + 1], vec![0; n + 1], vec![0; n + 1]);
        for (l, &m) in values.iter().enumerate() {
            p1[l + 1] = p1[l] + m;
            p2[l + 1] = p2[l] + m * m;
            p3[l + 1] = p3[l] + m * m * m;
        }
        Self {
            values: values.to_vec(),
            p1,
            p2,
            p3,
            min: *values.iter().min().expect("nonempty"),
            max: *values.iter().max().expect("nonempty"),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn total(&self) -> Moments {
        self.range(0, self.values.len())
    }

    /// Bounds enclosing every value; they can be loose after updates.
    pub fn bounds(&self) -> (i64, i64) {
        (self.min, self.max)
    }

    #[inline]
    fn range(&self, lo: usize, hi: usize) -> Moments {
        Moments {
            count: (hi - lo) as i64,
            sum: self.p1[hi] - self.p1[lo],
            sum_sq: self.p2[hi] - self.p2[lo],
            sum_cube: self.p3[hi] - self.p3[lo],
        }
    }

    /// Sums over `len` positions starting at `start`, wrapping around the end.
    #[inline]
    pub fn query_cyclic(&self, start: usize, len: usize) -> Moments {
        let n = self.values.len();
        let end = start + len;
        if end <= n {
            self.range(start, end)
        } else {
            self.range(start, n).merge(self.range(0, end - n))
        }
    }

    /// Sum of the values over a cyclic range.
    #[inline]
    pub fn sum_cyclic(&self, start: usize, len: usize) -> i64 {
        let n = self.values.len();
        let end = start + len;
        if end <= n {
            self.p1[end] - self.p1[start]
        } else {
            self.p1[n] - self.p1[start] + self.p1[end - n]
        }
    }

    /// Whether adding `step` to the cyclic range keeps every value in `lo..=hi`.
    pub fn shift_fits(&self, start: usize, len: usize, step: i64, lo: i64, hi: i64) -> bool {
        if self.min + step >= lo && self.max + step <= hi {
            return true;
        }
        let n = self.values.len();
        (0..len).all(|l| {
            let v = self.values[(start + l) % n] + step;
            lo <= v && v <= hi
        })
    }

    /// Adds `c` to `len` positions starting at `start`, wrapping around the end.
    pub fn add_cyclic(&mut self, start: usize, len: usize, c: i64) {
        let n = self.values.len();
        // a full turn is the same as shifting everything from 0
        let start = if len == n { 0 } else { start };
        let end = start + len;
        for l in start..end {
            let v = &mut self.values[if l < n { l } else { l - n }];
            *v += c;
            self.min = self.min.min(*v);
            self.max = self.max.max(*v);
        }
        if end <= n {
            self.shift_prefix(start, start + 1..end + 1, c, Moments::default());
            let d = self.block_change(start, len, c);
            self.offset_prefix(end + 1..n + 1, d);
        } else {
            let wrapped = end - n;
            self.shift_prefix(0, 1..wrapped + 1, c, Moments::default());
            let d = self.block_change(0, wrapped, c);
            self.shift_prefix(start, start + 1..n + 1, c, d);
            self.offset_prefix(wrapped + 1..start + 1, d);
        }
    }

    // change of the sums over `start..start+len` caused by adding `c`, read
    // from prefixes that already include it
    fn block_change(&self, start: usize, len: usize, c: i64) -> Moments {
        let s1 = self.p1[start + len] - self.p1[start] - c * len as i64;
        let n = len as i64;
        let s2 = self.p2[start + len] - self.p2[start] - 2 * c * s1 - c * c * n;
        Moments {
            count: 0,
            sum: c * n,
            sum_sq: 2 * c * s1 + c * c * n,
            sum_cube: 3 * c * s2 + 3 * c * c * s1 + c * c * c * n,
        }
    }

    // p[l] for l in `range` covers base..l shifted by `c`, on top of `carry`
    fn shift_prefix(&mut self, base: usize, range: std::ops::Range<usize>, c: i64, carry: Moments) {
        match c {
            1 => self.shift_prefix_by::<1>(base, range, carry),
            -1 => self.shift_prefix_by::<-1>(base, range, carry),
            _ => self.shift_prefix_general(base, range, c, carry),
        }
    }

    // unit steps are the hot path; constant `C` keeps the loop multiply-free
    fn shift_prefix_by<const C: i64>(
        &mut self,
        base: usize,
        range: std::ops::Range<usize>,
        carry: Moments,
    ) {
        let (b1, b2) = (self.p1[base], self.p2[base]);
        let lo = range.start;
        let (p1, p2, p3) = (
            &mut self.p1[range.clone()],
            &mut self.p2[range.clone()],
            &mut self.p3[range],
        );
        for (k, ((x1, x2), x3)) in p1
            .iter_mut()
            .zip(p2.iter_mut())
            .zip(p3.iter_mut())
            .enumerate()
        {
            let n = (lo + k - base) as i64;
            let s1 = *x1 - b1;
            let s2 = *x2 - b2;
            *x1 += carry.sum + C * n;
            *x2 += carry.sum_sq + 2 * C * s1 + n;
            *x3 += carry.sum_cube + 3 * C * s2 + 3 * s1 + C * n;
        }
    }

    fn shift_prefix_general(
        &mut self,
        base: usize,
        range: std::ops::Range<usize>,
        c: i64,
        carry: Moments,
    ) {
        let (b1, b2) = (self.p1[base], self.p2[base]);
        for l in range {
            let n = (l - base) as i64;
            let s1 = self.p1[l] - b1;
            let s2 = self.p2[l] - b2;
            self.p1[l] += carry.sum + c * n;
            self.p2[l] += carry.sum_sq + 2 * c * s1 + c * c * n;
            self.p3[l] += carry.sum_cube + 3 * c * s2 + 3 * c * c * s1 + c * c * c * n;
        }
    }

    fn offset_prefix(&mut self, range: std::ops::Range<usize>, d: Moments) {
        for l in range {
            self.p1[l] += d.sum;
            self.p2[l] += d.sum_sq;
            self.p3[l] += d.sum_cube;
        }
    }
}
