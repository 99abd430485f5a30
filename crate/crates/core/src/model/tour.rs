use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Instance;
use crate::error::{Error, Result};

/// Parses a tour over `n` cities.
///
/// Accepts either a whitespace-separated list of 1-based city indices or a
/// TSPLIB tour file whose `TOUR_SECTION` ends with `-1`. The returned tour is
/// rotated so that it starts at city 1.
pub fn parse_tour(text: &str, n: usize) -> Result<Vec<usize>> {
    let body = match text.find("TOUR_SECTION") {
        Some(at) => &text[at + "TOUR_SECTION".len()..],
        None => text,
    };
    let mut tour = Vec::with_capacity(n);
    for token in body.split_whitespace() {
        if token == "-1" || token == "EOF" {
            break;
        }
        let city: i64 = token
            .parse()
            .map_err(|_| Error::Validation(format!("tour entry {token:?} is not a city index")))?;
        if city < 1 || city as usize > n {
            return Err(Error::Validation(format!(
                "tour entry {city} outside [1, {n}]"
            )));
        }
        tour.push(city as usize);
    }
    validate_tour(&tour, n)?;
    Ok(rotate_to_first_city(tour))
}

/// Checks that `tour` is a permutation of `1..=n`.
pub fn validate_tour(tour: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &city in tour {
        if city < 1 || city > n {
            return Err(Error::Validation(format!(
                "tour entry {city} outside [1, {n}]"
            )));
        }
        if std::mem::replace(&mut seen[city - 1], true) {
            return Err(Error::DuplicateCity(city));
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Validation(format!(
            "tour does not visit city {}",
            missing + 1
        )));
    }
    Ok(())
}

/// Rotates a cyclic tour so that city 1 comes first.
pub fn rotate_to_first_city(mut tour: Vec<usize>) -> Vec<usize> {
    if let Some(start) = tour.iter().position(|&c| c == 1) {
        tour.rotate_left(start);
    }
    tour
}

/// Length of the closed tour, including the return leg.
pub fn tour_length(instance: &Instance, tour: &[usize]) -> f64 {
    let n = tour.len();
    (0..n)
        .map(|k| instance.distance(tour[k], tour[(k + 1) % n]))
        .sum()
}

fn nearest_neighbour(instance: &Instance, start: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = instance.city_count();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut current = start;
    visited[current - 1] = true;
    tour.push(current);
    let mut ties = Vec::new();
    while tour.len() < n {
        let mut best = f64::INFINITY;
        ties.clear();
        for next in 1..=n {
            if visited[next - 1] {
                continue;
            }
            let d = instance.distance(current, next);
            if d < best {
                best = d;
                ties.clear();
                ties.push(next);
            } else if d == best {
                ties.push(next);
            }
        }
        current = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..ties.len())]
        };
        visited[current - 1] = true;
        tour.push(current);
    }
    tour
}

/// First-improvement 2-opt over the segment reversals that keep position 0
/// fixed. Scans start at `offset` (mod the candidate range) and wrap around.
/// Returns once a full scan finds no improving exchange.
pub fn two_opt(instance: &Instance, tour: &mut [usize], offset: usize) {
    let n = tour.len();
    if n < 4 {
        return;
    }
    let d = |a: usize, b: usize| instance.distance(a, b);
    loop {
        let mut improved = false;
        'scan: for s in 0..(n - 1) {
            let i = 1 + (s + offset) % (n - 1);
            for j in (i + 1)..n {
                let a = tour[i - 1];
                let b = tour[i];
                let c = tour[j];
                let e = tour[(j + 1) % n];
                if a == c || b == e {
                    continue;
                }
                let gain = d(a, b) + d(c, e) - d(a, c) - d(b, e);
                if gain > 1e-9 {
                    tour[i..=j].reverse();
                    improved = true;
                    break 'scan;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Nearest-neighbour tour from city 1 with seeded random tie-breaking,
/// improved by first-improvement 2-opt. Deterministic for a given seed.
pub fn nn_tour(instance: &Instance, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tour = nearest_neighbour(instance, 1, &mut rng);
    two_opt(instance, &mut tour, 0);
    tour
}

/// A seeded local-optimum tour for building tour ensembles.
///
/// Nearest neighbour starts from a random city, 2-opt scans from a random
/// offset and the travel direction is flipped with probability 1/2, so
/// different seeds give different 2-opt local optima. The result starts at
/// city 1.
pub fn randomized_tour(instance: &Instance, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = instance.city_count();
    let start = rng.gen_range(1..=n);
    let mut tour = nearest_neighbour(instance, start, &mut rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    two_opt(instance, &mut tour, order[0]);
    if rng.gen_bool(0.5) {
        tour.reverse();
    }
    rotate_to_first_city(tour)
}
