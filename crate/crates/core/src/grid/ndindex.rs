/// Row-major strides with dimension 0 fastest-varying.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &n in shape {
        out.push(acc);
        acc *= n;
    }
    out
}

/// Visits the tensor product of per-dimension position lists, first list
/// varying fastest, passing the linear offset `Σ pos[d]·stride[d]`.
pub fn for_each_tensor(lists: &[&[usize]], strides: &[usize], mut f: impl FnMut(usize)) {
    debug_assert_eq!(lists.len(), strides.len());
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let nd = lists.len();
    let mut cursor = vec![0usize; nd];
    loop {
        let mut offset = 0;
        for d in 1..nd {
            offset += lists[d][cursor[d]] * strides[d];
        }
        for &p in lists[0] {
            f(offset + p * strides[0]);
        }
        let mut d = 1;
        loop {
            if d >= nd {
                return;
            }
            cursor[d] += 1;
            if cursor[d] < lists[d].len() {
                break;
            }
            cursor[d] = 0;
            d += 1;
        }
    }
}

/// Visits every multi-index of `shape`, dimension 0 varying fastest.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut d = 0;
        loop {
            if d >= shape.len() {
                return;
            }
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_visit_order_is_dimension_zero_fastest() {
        let a = [0usize, 2];
        let b = [1usize, 2];
        let s = strides(&[3, 3]);
        let mut seen = vec![];
        for_each_tensor(&[&a, &b], &s, |i| seen.push(i));
        assert_eq!(seen, vec![3, 5, 6, 8]);
    }

    #[test]
    fn index_visit_covers_shape() {
        let mut count = 0;
        for_each_index(&[2, 3, 4], |_| count += 1);
        assert_eq!(count, 24);
        for_each_index(&[2, 0], |_| count += 1);
        assert_eq!(count, 24);
    }
}
