//! Helpers shared by the integration and acceptance targets.
#![allow(dead_code)]

use std::collections::HashSet;

use ldc_forge::pebbling::Dag;

/// Minimum pebbling space by iterative deepening over single moves: place
/// one pebble whose parents are all pebbled, or remove one. Peak space of a
/// parallel pebbling equals the largest configuration of its sequential
/// refinement, so the two minima agree.
pub fn min_space_dfs(g: &Dag) -> usize {
    let n = g.len();
    if n == 0 {
        return 0;
    }
    let sinks: Vec<u32> = g.sinks().to_vec();
    let parent_masks: Vec<u32> = (1..=n as u32)
        .map(|v| g.parents(v).iter().fold(0u32, |m, &u| m | 1 << (u - 1)))
        .collect();
    for bound in 1..=n {
        if reachable(bound, &parent_masks, &sinks) {
            return bound;
        }
    }
    unreachable!("pebbling every node at once always works")
}

/// Depth-first search with an explicit stack over (configuration, sinks
/// pebbled so far), configurations capped at `bound` pebbles.
fn reachable(bound: usize, parents: &[u32], sinks: &[u32]) -> bool {
    let all = (1u32 << sinks.len()) - 1;
    let mut seen = HashSet::new();
    let mut stack = vec![(0u32, 0u32)];
    while let Some((config, done)) = stack.pop() {
        if done == all {
            return true;
        }
        if !seen.insert((config, done)) {
            continue;
        }
        for (i, &pm) in parents.iter().enumerate() {
            let bit = 1u32 << i;
            if config & bit != 0 {
                stack.push((config & !bit, done));
            } else if pm & config == pm && (config.count_ones() as usize) < bound {
                let d = sinks
                    .iter()
                    .enumerate()
                    .filter(|&(_, &s)| s as usize == i + 1)
                    .fold(done, |d, (k, _)| d | 1 << k);
                stack.push((config | bit, d));
            }
        }
    }
    false
}
