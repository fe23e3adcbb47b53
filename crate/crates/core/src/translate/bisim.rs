use std::collections::{BTreeMap, HashMap};

use crate::xmdp::Xmdp;

/// Coarsest partition of the e-states that respects the underlying state,
/// the reward, and per-action transition probabilities into blocks. Returns
/// a block id per e-state. Probabilities are compared to 1e-9.
pub fn bisimulation_blocks(m: &Xmdp) -> Vec<usize> {
    let mut ids: HashMap<(u64, u64, bool), usize> = HashMap::new();
    let mut block: Vec<usize> = (0..m.len())
        .map(|e| {
            let key = (m.states[e].0, m.rewards[e].to_bits(), m.dead[e]);
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();
    let mut count = ids.len();
    loop {
        let mut sigs: HashMap<(usize, Vec<Vec<(usize, i64)>>), usize> = HashMap::new();
        let refined: Vec<usize> = (0..m.len())
            .map(|e| {
                let per_action = m.trans[e]
                    .iter()
                    .map(|dist| {
                        let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
                        for &(f, p) in dist {
                            *mass.entry(block[f]).or_default() += p;
                        }
                        mass.into_iter().map(|(b, p)| (b, (p * 1e9).round() as i64)).collect()
                    })
                    .collect();
                let next = sigs.len();
                *sigs.entry((block[e], per_action)).or_insert(next)
            })
            .collect();
        let new_count = sigs.len();
        block = refined;
        if new_count == count {
            return block;
        }
        count = new_count;
    }
}

/// Number of blocks of [`bisimulation_blocks`].
pub fn bisimulation_quotient_size(m: &Xmdp) -> usize {
    let blocks = bisimulation_blocks(m);
    blocks.iter().copied().max().map_or(0, |b| b + 1)
}
