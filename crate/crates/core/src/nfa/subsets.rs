/// Enumerates index subsets of `0..n` with sizes in `min..=max`, in
/// lexicographic order of their sorted index lists.
///
/// `extend(chosen, next)` is asked before `next` is appended to a partial
/// subset; returning `false` prunes `next` and every later index, so it must
/// be monotone in `next` (candidates sorted by time with a span limit are).
/// `visit` receives each complete subset.
pub fn for_each_subset<E, V>(n: usize, min: usize, max: usize, mut extend: E, mut visit: V)
where
    E: FnMut(&[usize], usize) -> bool,
    V: FnMut(&[usize]),
{
    let max = max.min(n);
    if min > max {
        return;
    }
    let mut chosen = Vec::with_capacity(max);
    rec(n, min, max, 0, &mut chosen, &mut extend, &mut visit);
}

fn rec<E, V>(
    n: usize,
    min: usize,
    max: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    extend: &mut E,
    visit: &mut V,
) where
    E: FnMut(&[usize], usize) -> bool,
    V: FnMut(&[usize]),
{
    if chosen.len() >= min && !chosen.is_empty() {
        visit(chosen);
    }
    if chosen.len() == max {
        return;
    }
    for next in start..n {
        if !extend(chosen, next) {
            break;
        }
        chosen.push(next);
        rec(n, min, max, next + 1, chosen, extend, visit);
        chosen.pop();
    }
}
