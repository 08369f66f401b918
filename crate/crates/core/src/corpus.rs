//! Named benchmark systems.
//!
//! | name  | states | what it exercises |
//! |-------|--------|-------------------|
//! | SWAP2 | 2  | frozen microdynamics, macrodynamics that swap every step: per-time MI is maximal while no fixed decoder works |
//! | IID4  | 4  | IID noise: a one-state compression loses no accuracy and costs nothing |
//! | LUMP4 | 4  | strongly lumpable into `{0,1}`, `{2,3}` |
//! | CYL   | 50 | piston position × nuisance gas configuration; position alone predicts perfectly |
//! | RING8 | 8  | lazy biased walk on a ring observed through four arcs |

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::SscError;
use crate::matrix::Matrix;
use crate::model::{discrete_metric, singleton_triple, CompressionTriple, MarkovSystem, Observable, WeightSpec};
use crate::optimize::{induced_triple, InduceOptions};
use crate::partition::Partition;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleName {
    Swap2,
    Iid4,
    Lump4,
    Cyl,
    Ring8,
}

impl ExampleName {
    pub const ALL: [ExampleName; 5] = [
        ExampleName::Swap2,
        ExampleName::Iid4,
        ExampleName::Lump4,
        ExampleName::Cyl,
        ExampleName::Ring8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleName::Swap2 => "SWAP2",
            ExampleName::Iid4 => "IID4",
            ExampleName::Lump4 => "LUMP4",
            ExampleName::Cyl => "CYL",
            ExampleName::Ring8 => "RING8",
        }
    }
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleName {
    type Err = SscError;

    fn from_str(s: &str) -> Result<Self> {
        ExampleName::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SscError::UnknownExample(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct Example {
    pub name: ExampleName,
    pub system: MarkovSystem,
    pub observable: Observable,
    /// Default temporal weight shipped with the example.
    pub weight: WeightSpec,
    pub reference: Option<CompressionTriple>,
    /// Set when the reference triple is induced from a hard partition.
    pub reference_partition: Option<Partition>,
}

/// Parses `name` and builds the example.
pub fn build_example_by_name(name: &str) -> Result<Example> {
    Ok(build_example(name.parse()?))
}

pub fn build_example(name: ExampleName) -> Example {
    match name {
        ExampleName::Swap2 => swap2(),
        ExampleName::Iid4 => iid4(),
        ExampleName::Lump4 => lump4(),
        ExampleName::Cyl => cyl(),
        ExampleName::Ring8 => ring8(),
    }
}

fn swap2() -> Example {
    let swap = Matrix::from_fn(2, 2, |a, b| if a != b { 1.0 } else { 0.0 });
    Example {
        name: ExampleName::Swap2,
        system: MarkovSystem::new(Matrix::identity(2), vec![0.5, 0.5]),
        observable: Observable::identity(2).with_cost_matrix(discrete_metric(2)),
        weight: WeightSpec::uniform(1, true),
        reference: Some(CompressionTriple::new(Matrix::identity(2), swap, Matrix::identity(2))),
        reference_partition: None,
    }
}

fn iid4() -> Example {
    Example {
        name: ExampleName::Iid4,
        system: MarkovSystem::new(Matrix::from_fn(4, 4, |_, _| 0.25), vec![0.25; 4]),
        observable: Observable::identity(4).with_cost_matrix(discrete_metric(4)),
        weight: WeightSpec::uniform(1, false),
        reference: Some(singleton_triple(4, &[0.25; 4])),
        reference_partition: None,
    }
}

/// Transition rows of the lumpable four-state chain.
pub const LUMP4_TRANSITION: [[f64; 4]; 4] = [
    [0.1, 0.2, 0.3, 0.4],
    [0.3, 0.0, 0.5, 0.2],
    [0.25, 0.25, 0.25, 0.25],
    [0.4, 0.1, 0.2, 0.3],
];

fn block_indicator(assignment: &[usize], blocks: usize) -> Matrix {
    Matrix::from_fn(assignment.len(), blocks, |x, b| if assignment[x] == b { 1.0 } else { 0.0 })
}

fn with_induced_reference(
    name: ExampleName,
    system: MarkovSystem,
    observable: Observable,
    weight: WeightSpec,
    partition: Partition,
) -> Example {
    let w = weight.materialize().expect("corpus weights are valid");
    let reference = induced_triple(&partition, &system, &observable, &w, InduceOptions::default())
        .expect("Bayes predictor needs no cost matrix");
    Example {
        name,
        system,
        observable,
        weight,
        reference: Some(reference),
        reference_partition: Some(partition),
    }
}

fn lump4() -> Example {
    let rows: Vec<Vec<f64>> = LUMP4_TRANSITION.iter().map(|r| r.to_vec()).collect();
    let blocks = [0, 0, 1, 1];
    with_induced_reference(
        ExampleName::Lump4,
        MarkovSystem::new(Matrix::from_rows(&rows).expect("square"), vec![0.25; 4]),
        Observable::new(block_indicator(&blocks, 2), Some(discrete_metric(2))),
        WeightSpec::geometric(0.5, 5, false),
        Partition::from_assignment(blocks.to_vec()),
    )
}

/// Piston positions.
pub const CYL_POSITIONS: usize = 10;
/// Nuisance microconfigurations per position.
pub const CYL_NUISANCE: usize = 5;

fn cyl() -> Example {
    let (z_count, g_count) = (CYL_POSITIONS, CYL_NUISANCE);
    let n = z_count * g_count;
    let state = |z: usize, g: usize| z * g_count + g;
    let decrement = |z: usize| z.saturating_sub(1);

    let mut p = Matrix::zeros(n, n);
    for z in 0..z_count {
        for g in 0..g_count {
            for g2 in 0..g_count {
                p[(state(z, g), state(decrement(z), g2))] = 1.0 / g_count as f64;
            }
        }
    }
    let mut initial = vec![0.0; n];
    for g in 0..g_count {
        initial[state(z_count - 1, g)] = 1.0 / g_count as f64;
    }
    let projection = Matrix::from_fn(n, z_count, |x, z| if x / g_count == z { 1.0 } else { 0.0 });
    let distance = Matrix::from_fn(z_count, z_count, |a, b| (a as f64 - b as f64).abs());
    let phi = Matrix::from_fn(z_count, z_count, |z, z2| if decrement(z) == z2 { 1.0 } else { 0.0 });

    Example {
        name: ExampleName::Cyl,
        system: MarkovSystem::new(p, initial),
        observable: Observable::new(projection.clone(), Some(distance)),
        weight: WeightSpec::uniform(20, false),
        reference: Some(CompressionTriple::new(projection, phi, Matrix::identity(z_count))),
        reference_partition: Some(Partition::from_assignment((0..n).map(|x| x / g_count).collect())),
    }
}

fn ring8() -> Example {
    let n = 8;
    let arcs = 4;
    let (stay, clockwise, counter) = (0.2, 0.6, 0.2);
    let p = Matrix::from_fn(n, n, |i, j| {
        if j == i {
            stay
        } else if j == (i + 1) % n {
            clockwise
        } else if j == (i + n - 1) % n {
            counter
        } else {
            0.0
        }
    });
    let arc_of: Vec<usize> = (0..n).map(|x| x * arcs / n).collect();
    let ring_distance = Matrix::from_fn(arcs, arcs, |a, b| {
        let d = a.abs_diff(b);
        d.min(arcs - d) as f64
    });
    with_induced_reference(
        ExampleName::Ring8,
        MarkovSystem::new(p, vec![1.0 / n as f64; n]),
        Observable::new(block_indicator(&arc_of, arcs), Some(ring_distance)),
        WeightSpec::geometric(0.3, 6, false),
        Partition::from_assignment(arc_of),
    )
}
