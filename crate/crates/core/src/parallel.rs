//! Order-preserving map that fans out over rayon when the `parallel`
//! feature is enabled. Output order always follows input order, so results
//! do not depend on the worker count.

#[cfg(feature = "parallel")]
pub(crate) fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
