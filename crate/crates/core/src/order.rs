use std::cmp::Ordering;

/// Indices of `keys` sorted by ascending key, ties broken by ascending feature index.
/// `+inf` sorts last.
pub(crate) fn ascending_by<T>(items: &[T], key: impl Fn(&T) -> (f64, usize)) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, ia) = key(&items[a]);
        let (kb, ib) = key(&items[b]);
        ka.total_cmp(&kb).then(ia.cmp(&ib))
    });
    order
}

pub(crate) fn descending_then_index(a: (f64, usize), b: (f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}
