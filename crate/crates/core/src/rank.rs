//! Order-preserving interning shared by the refinement engines.
//!
//! Every key produced by every job is collected into one sorted dictionary;
//! each key is then replaced by its position. Equal keys get equal ids across
//! jobs, and ids compare like the keys they replace, so the result does not
//! depend on chunking or thread count.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 15;

/// Ranks `key(job, i)` for `i in 0..lens[job]` against the union of all keys.
/// Returns the ids per job and the dictionary size.
pub(crate) fn rank_by<K, F>(lens: &[usize], key: F) -> (Vec<Vec<u32>>, usize)
where
    K: Ord + Copy + Send + Sync,
    F: Fn(usize, usize) -> K + Sync,
{
    if lens.iter().sum::<usize>() <= CHUNK {
        let mut dict: Vec<K> = lens.iter().enumerate().flat_map(|(j, &len)| (0..len).map(move |i| (j, i))).map(|(j, i)| key(j, i)).collect();
        dict.sort_unstable();
        dict.dedup();
        let ids = lens
            .iter()
            .enumerate()
            .map(|(j, &len)| (0..len).map(|i| dict.binary_search(&key(j, i)).expect("key collected") as u32).collect())
            .collect();
        return (ids, dict.len());
    }
    let mut dict: Vec<K> = lens
        .iter()
        .enumerate()
        .flat_map(|(j, &len)| {
            let key = &key;
            (0..len.div_ceil(CHUNK)).into_par_iter().map(move |c| {
                let mut local: Vec<K> = (c * CHUNK..((c + 1) * CHUNK).min(len)).map(|i| key(j, i)).collect();
                local.sort_unstable();
                local.dedup();
                local
            }).collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    dict.par_sort_unstable();
    dict.dedup();
    let ids = lens
        .iter()
        .enumerate()
        .map(|(j, &len)| {
            (0..len)
                .into_par_iter()
                .map(|i| dict.binary_search(&key(j, i)).expect("key collected") as u32)
                .collect()
        })
        .collect();
    (ids, dict.len())
}

/// Ranks arbitrary owned keys (used where keys are variable length).
pub(crate) fn rank_owned<K: Ord + Clone + Send + Sync>(jobs: &[Vec<K>]) -> (Vec<Vec<u32>>, usize) {
    let mut dict: Vec<&K> = jobs.iter().flatten().collect();
    if dict.len() <= CHUNK {
        dict.sort_unstable();
        dict.dedup();
        let ids = jobs
            .iter()
            .map(|keys| keys.iter().map(|k| dict.binary_search(&k).expect("key collected") as u32).collect())
            .collect();
        return (ids, dict.len());
    }
    dict.par_sort_unstable();
    dict.dedup();
    let ids = jobs
        .iter()
        .map(|keys| {
            keys.par_iter()
                .map(|k| dict.binary_search(&k).expect("key collected") as u32)
                .collect()
        })
        .collect();
    (ids, dict.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_shared_and_ordered() {
        let a = [30u64, 10, 30];
        let b = [20u64, 10];
        let (ids, count) = rank_by(&[3, 2], |j, i| if j == 0 { a[i] } else { b[i] });
        assert_eq!(ids, vec![vec![2, 0, 2], vec![1, 0]]);
        assert_eq!(count, 3);
        let (ids, count) = rank_owned(&[vec![vec![1u32, 2], vec![1]], vec![vec![0]]]);
        assert_eq!(ids, vec![vec![2, 1], vec![0]]);
        assert_eq!(count, 3);
    }

    #[test]
    fn large_inputs_cross_chunks() {
        let n = 3 * CHUNK + 7;
        let (ids, count) = rank_by(&[n], |_, i| (i % 1000) as u32);
        assert_eq!(count, 1000);
        assert!(ids[0].iter().enumerate().all(|(i, &id)| id as usize == i % 1000));
    }
}
