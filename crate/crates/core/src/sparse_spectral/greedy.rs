use crate::error::Result;
use crate::support::SupportSet;

/// Local search stops after this many accepted swaps.
const MAX_SWAP_ROUNDS: usize = 100;

/// Forward passes are started from this many of the best singletons.
pub(crate) const GREEDY_STARTS: usize = 3;

/// Forward greedy support selection followed by single-coordinate swaps.
///
/// Starts from the best singleton, repeatedly adds the coordinate that
/// maximizes `objective`, then applies the best improving swap until none
/// remains. The same climb is repeated from the next best singletons and the
/// best result kept. Ties go to the smallest index.
pub fn greedy_support_search(mut objective: impl FnMut(&SupportSet) -> f64, d: usize, s: usize) -> SupportSet {
    greedy_search_fallible(d, s, |idx| Ok(objective(&SupportSet::new(idx.to_vec()).expect("sorted support"))))
        .expect("infallible objective")
}

pub(crate) fn greedy_search_fallible<F>(d: usize, s: usize, objective: F) -> Result<SupportSet>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    greedy_with_starts(d, s, GREEDY_STARTS, objective)
}

pub(crate) fn greedy_with_starts<F>(d: usize, s: usize, starts: usize, mut objective: F) -> Result<SupportSet>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let s = s.min(d);
    if s == d {
        return SupportSet::new((0..d).collect());
    }

    let mut singles = Vec::with_capacity(d);
    for j in 0..d {
        singles.push((objective(&[j])?, j));
    }
    // stable sort keeps the smallest index first among ties
    singles.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best: Option<(f64, Vec<usize>)> = None;
    for &(v, j) in singles.iter().take(starts.max(1)) {
        let (v, support) = climb(d, s, vec![j], v, &mut objective)?;
        let better = match &best {
            None => true,
            Some((bv, bs)) => v > *bv || (v == *bv && support < *bs),
        };
        if better {
            best = Some((v, support));
        }
    }
    SupportSet::new(best.expect("at least one start").1)
}

fn climb<F>(d: usize, s: usize, mut current: Vec<usize>, mut current_val: f64, objective: &mut F) -> Result<(f64, Vec<usize>)>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let mut cand: Vec<usize> = Vec::with_capacity(s);
    while current.len() < s {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..d {
            if current.contains(&j) {
                continue;
            }
            insert_sorted(&current, j, &mut cand);
            let v = objective(&cand)?;
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, j));
            }
        }
        let (v, j) = best.expect("d > current size");
        let pos = current.partition_point(|&x| x < j);
        current.insert(pos, j);
        current_val = v;
    }

    for _ in 0..MAX_SWAP_ROUNDS {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for pos in 0..s {
            for j in 0..d {
                if current.contains(&j) {
                    continue;
                }
                cand.clear();
                cand.extend(current.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &x)| x));
                let at = cand.partition_point(|&x| x < j);
                cand.insert(at, j);
                let v = objective(&cand)?;
                let threshold = best.as_ref().map_or(current_val, |(bv, _)| *bv);
                if v > threshold + 1e-12 * threshold.abs() {
                    best = Some((v, cand.clone()));
                }
            }
        }
        match best {
            Some((v, support)) => {
                current = support;
                current_val = v;
            }
            None => break,
        }
    }
    Ok((current_val, current))
}

fn insert_sorted(base: &[usize], j: usize, out: &mut Vec<usize>) {
    out.clear();
    let at = base.partition_point(|&x| x < j);
    out.extend_from_slice(&base[..at]);
    out.push(j);
    out.extend_from_slice(&base[at..]);
}
