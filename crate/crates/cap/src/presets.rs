//! Ready-made synthetic corpora, also reachable through `cap synth --preset`.

use cap_core::synth::{axis_means, GrammarRule, OptionalGroup, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Six well separated sub-actions, one repeated, one optional.
    Recovery,
    /// Overlapping sub-actions; 40% of videos omit two of them.
    Absence,
    /// A grammar in which two sub-actions occur twice.
    MultiOccurrence,
}

fn rule(sequence: &[usize], weight: f64) -> GrammarRule {
    GrammarRule {
        sequence: sequence.to_vec(),
        weight,
    }
}

impl Preset {
    pub fn spec(self, seed: u64) -> SynthSpec {
        match self {
            Preset::Recovery => SynthSpec {
                n_subactions: 6,
                dim: 16,
                n_videos: 50,
                segment_len: (10, 14),
                means: axis_means(6, 16, 8.0).expect("6 <= 16"),
                sigmas: vec![1.0; 6],
                grammar: vec![rule(&[0, 1, 0, 2, 3, 4, 5], 1.0)],
                optional: vec![OptionalGroup {
                    subactions: vec![4],
                    drop_prob: 0.2,
                }],
                seed,
            },
            Preset::Absence => SynthSpec {
                n_subactions: 6,
                dim: 8,
                n_videos: 50,
                segment_len: (10, 14),
                means: axis_means(6, 8, 4.0).expect("6 <= 8"),
                sigmas: vec![1.0; 6],
                grammar: vec![rule(&[0, 1, 2, 3, 4, 5], 1.0)],
                optional: vec![OptionalGroup {
                    subactions: vec![4, 5],
                    drop_prob: 0.4,
                }],
                seed,
            },
            Preset::MultiOccurrence => SynthSpec {
                n_subactions: 4,
                dim: 8,
                n_videos: 50,
                segment_len: (10, 14),
                means: axis_means(4, 8, 6.0).expect("4 <= 8"),
                sigmas: vec![1.0; 4],
                grammar: vec![rule(&[0, 1, 0, 2, 3, 2], 1.0)],
                optional: Vec::new(),
                seed,
            },
        }
    }
}
