//! Switch between rayon and sequential evaluation of independent work items.
//!
//! Both modes produce results in index order, so any reduction done by the
//! caller over the returned vector is bit-identical across modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Evaluates `f(0..n)` and collects the results in order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Applies `f` to every element of `out` together with its index.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        match self {
            Exec::Sequential => out.iter_mut().enumerate().for_each(|(i, v)| f(i, v)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => out.par_iter_mut().enumerate().for_each(|(i, v)| f(i, v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt() * 1.1;
        let seq = Exec::Sequential.map(1000, f);
        assert_eq!(seq, Exec::default().map(1000, f));
        let mut out = vec![0.0; 10];
        Exec::default().fill(&mut out, |i, v| *v = i as f64);
        assert_eq!(out[9], 9.0);
    }
}
