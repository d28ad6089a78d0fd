use alloc::vec::Vec;

/// Symmetric matrix storing only the upper triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

/// Position of `(i, j)` (any order) in packed upper-triangular storage.
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

impl<T: Clone> SymMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        SymMatrix { n, data: alloc::vec![value; n * (n + 1) / 2] }
    }

    /// Builds from a closure evaluated once per unordered pair `i <= j`.
    pub fn from_fn<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[packed_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = packed_index(self.n, i, j);
        self.data[k] = v;
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = packed_index(self.n, i, j);
        &mut self.data[k]
    }

    /// Upper-triangle entries in row-major order.
    pub fn packed(&self) -> &[T] {
        &self.data
    }

    pub fn from_packed(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * (n + 1) / 2, "packed length mismatch");
        SymMatrix { n, data }
    }

    pub fn map<U: Clone, F: FnMut(&T) -> U>(&self, f: F) -> SymMatrix<U> {
        SymMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        SymMatrix::from_fn(keep.len(), |a, b| self.get(keep[a], keep[b]).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_layout() {
        let m = SymMatrix::from_fn(3, |i, j| 10 * i + j);
        assert_eq!(m.packed(), &[0, 1, 2, 11, 12, 22]);
        assert_eq!(*m.get(2, 0), 2);
        assert_eq!(*m.get(2, 1), 12);
    }
}
