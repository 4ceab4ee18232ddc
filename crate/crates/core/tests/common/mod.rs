#![allow(dead_code)]

pub mod oracle;

use rand::rngs::StdRng;
use rand::Rng;

use phasefield::State;

/// Displacements uniform in `(−du, du)`, damage uniform in `(dlo, dhi)`.
pub fn random_state(rng: &mut StdRng, nv: usize, du: f64, dlo: f64, dhi: f64) -> State {
    let u: Vec<[f64; 2]> = (0..nv).map(|_| [du * rng.random_range(-1.0..1.0), du * rng.random_range(-1.0..1.0)]).collect();
    let d: Vec<f64> = (0..nv).map(|_| rng.random_range(dlo..dhi)).collect();
    State::from_parts(&u, &d).unwrap()
}
