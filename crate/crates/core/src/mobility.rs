//! Manhattan-grid vehicle mobility on a square road lattice with fixed
//! roadside units.
//!
//! Vehicles travel along grid edges at constant speed and pick a uniformly
//! random legal continuation at every intersection (no U-turns unless the
//! intersection is a dead end). Each vehicle carries its own turn stream, and
//! kinematic state only mutates at intersection crossings whose times are
//! exact functions of the previous crossing. Querying a position between
//! crossings is pure, so observers (snapshots, extra events) never perturb a
//! trajectory.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor applied to inter-node distances before channel evaluation; the rate
/// expression diverges as the distance approaches zero.
pub const D_MIN_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("step duration must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("grid extent {extent} is not a positive multiple of block length {block}")]
    BadGrid { extent: f64, block: f64 },
}

/// 2D point in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
}

/// Euclidean distance clamped below at [`D_MIN_M`].
pub fn distance(a: Vec2, b: Vec2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt().max(D_MIN_M)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heading {
    North,
    South,
    East,
    West,
}

impl Heading {
    fn reverse(self) -> Heading {
        match self {
            Heading::North => Heading::South,
            Heading::South => Heading::North,
            Heading::East => Heading::West,
            Heading::West => Heading::East,
        }
    }

    fn unit(self) -> (f64, f64) {
        match self {
            Heading::North => (0.0, 1.0),
            Heading::South => (0.0, -1.0),
            Heading::East => (1.0, 0.0),
            Heading::West => (-1.0, 0.0),
        }
    }
}

/// Square road lattice: roads every `block_length_m` in both axes over
/// `[0, extent_m]²`, plus the fixed RSU positions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RoadGrid {
    pub extent_m: f64,
    pub block_length_m: f64,
    pub rsu_positions: Vec<Vec2>,
}

impl RoadGrid {
    pub fn new(
        extent_m: f64,
        block_length_m: f64,
        rsu_positions: Vec<Vec2>,
    ) -> Result<Self, MobilityError> {
        let lines = extent_m / block_length_m;
        if !(extent_m > 0.0 && block_length_m > 0.0) || (lines - lines.round()).abs() > 1e-9 {
            return Err(MobilityError::BadGrid {
                extent: extent_m,
                block: block_length_m,
            });
        }
        Ok(RoadGrid {
            extent_m,
            block_length_m,
            rsu_positions,
        })
    }

    /// 2 km × 2 km grid with 250 m blocks and 16 RSUs on a 4×4 lattice at
    /// {250, 750, 1250, 1750}² metres.
    pub fn paper_default() -> Self {
        let coords = [250.0, 750.0, 1250.0, 1750.0];
        let mut rsu = Vec::with_capacity(16);
        for &y in &coords {
            for &x in &coords {
                rsu.push(Vec2::new(x, y));
            }
        }
        RoadGrid::new(2000.0, 250.0, rsu).expect("default grid is valid")
    }

    /// Number of road lines per axis (intersections per row/column).
    pub fn lines(&self) -> usize {
        (self.extent_m / self.block_length_m).round() as usize + 1
    }

    fn legal_headings(&self, at: Vec2) -> impl Iterator<Item = Heading> + '_ {
        [Heading::North, Heading::South, Heading::East, Heading::West]
            .into_iter()
            .filter(move |h| match h {
                Heading::North => at.y < self.extent_m,
                Heading::South => at.y > 0.0,
                Heading::East => at.x < self.extent_m,
                Heading::West => at.x > 0.0,
            })
    }
}

/// One vehicle's kinematic state: a position anchored at the last crossing,
/// a heading, a constant speed, and a private turn stream.
#[derive(Debug, Clone)]
pub struct VehicleKinematics {
    pub vehicle_id: usize,
    anchor: Vec2,
    anchor_time: f64,
    time: f64,
    pub heading: Heading,
    pub speed_mps: f64,
    turn_rng: ChaCha8Rng,
}

impl VehicleKinematics {
    pub fn new(
        vehicle_id: usize,
        position: Vec2,
        heading: Heading,
        speed_mps: f64,
        start_time: f64,
        turn_seed: u64,
    ) -> Self {
        VehicleKinematics {
            vehicle_id,
            anchor: position,
            anchor_time: start_time,
            time: start_time,
            heading,
            speed_mps,
            turn_rng: ChaCha8Rng::seed_from_u64(turn_seed),
        }
    }

    /// Current simulated time this vehicle has been advanced to.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Position at the current time. Pure; repeated calls do not perturb the
    /// trajectory.
    pub fn position(&self) -> Vec2 {
        let (ux, uy) = self.heading.unit();
        let d = self.speed_mps * (self.time - self.anchor_time);
        Vec2::new(self.anchor.x + ux * d, self.anchor.y + uy * d)
    }

    /// Advances to absolute time `t`, processing every intersection crossing
    /// in between. Crossing times depend only on the previous crossing, never
    /// on when this method is called, so any event interleaving yields the
    /// same trajectory.
    pub fn advance_to(&mut self, t: f64, grid: &RoadGrid) {
        debug_assert!(t >= self.time, "kinematics advanced backwards");
        loop {
            let dist = self.distance_to_next_node(grid);
            let t_cross = self.anchor_time + dist / self.speed_mps;
            if t_cross > t {
                break;
            }
            self.anchor = self.next_node(grid);
            self.anchor_time = t_cross;
            self.turn(grid);
        }
        self.time = t;
    }

    fn distance_to_next_node(&self, grid: &RoadGrid) -> f64 {
        let b = grid.block_length_m;
        match self.heading {
            Heading::East => ((self.anchor.x / b).floor() + 1.0) * b - self.anchor.x,
            Heading::West => self.anchor.x - ((self.anchor.x / b).ceil() - 1.0) * b,
            Heading::North => ((self.anchor.y / b).floor() + 1.0) * b - self.anchor.y,
            Heading::South => self.anchor.y - ((self.anchor.y / b).ceil() - 1.0) * b,
        }
    }

    fn next_node(&self, grid: &RoadGrid) -> Vec2 {
        let b = grid.block_length_m;
        match self.heading {
            Heading::East => Vec2::new(((self.anchor.x / b).floor() + 1.0) * b, self.anchor.y),
            Heading::West => Vec2::new(((self.anchor.x / b).ceil() - 1.0) * b, self.anchor.y),
            Heading::North => Vec2::new(self.anchor.x, ((self.anchor.y / b).floor() + 1.0) * b),
            Heading::South => Vec2::new(self.anchor.x, ((self.anchor.y / b).ceil() - 1.0) * b),
        }
    }

    fn turn(&mut self, grid: &RoadGrid) {
        let back = self.heading.reverse();
        let options: Vec<Heading> = grid
            .legal_headings(self.anchor)
            .filter(|&h| h != back)
            .collect();
        self.heading = if options.is_empty() {
            back // dead end; full lattices never hit this
        } else {
            options[self.turn_rng.gen_range(0..options.len())]
        };
    }
}

/// Spawns `count` vehicles uniformly at random on grid edges with ids
/// `start_id..start_id + count`. Speeds are uniform over `speed_range_mps`;
/// each vehicle receives a private turn stream drawn from `rng`.
pub fn spawn_vehicles(
    count: usize,
    start_id: usize,
    start_time: f64,
    grid: &RoadGrid,
    speed_range_mps: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<VehicleKinematics> {
    let lines = grid.lines();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let horizontal = rng.gen_range(0..2) == 0;
        let line = rng.gen_range(0..lines) as f64 * grid.block_length_m;
        let offset = rng.gen_range(0.0..grid.extent_m);
        let forward = rng.gen_range(0..2) == 0;
        let speed = rng.gen_range(speed_range_mps.0..speed_range_mps.1);
        let turn_seed = rng.gen::<u64>();
        let (position, heading) = if horizontal {
            (
                Vec2::new(offset, line),
                if forward { Heading::East } else { Heading::West },
            )
        } else {
            (
                Vec2::new(line, offset),
                if forward { Heading::North } else { Heading::South },
            )
        };
        out.push(VehicleKinematics::new(
            start_id + i,
            position,
            heading,
            speed,
            start_time,
            turn_seed,
        ));
    }
    out
}

/// Advances every vehicle by `dt` seconds from its current time.
pub fn step(
    vehicles: &mut [VehicleKinematics],
    grid: &RoadGrid,
    dt: f64,
) -> Result<(), MobilityError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(MobilityError::NonPositiveStep(dt));
    }
    for v in vehicles.iter_mut() {
        let t = v.time + dt;
        v.advance_to(t, grid);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn in_extent(p: Vec2, grid: &RoadGrid) -> bool {
        let eps = 1e-9;
        p.x >= -eps && p.x <= grid.extent_m + eps && p.y >= -eps && p.y <= grid.extent_m + eps
    }

    #[test]
    fn paper_grid_has_16_rsus_on_lattice() {
        let grid = RoadGrid::paper_default();
        assert_eq!(grid.rsu_positions.len(), 16);
        for p in &grid.rsu_positions {
            assert!([250.0, 750.0, 1250.0, 1750.0].contains(&p.x));
            assert!([250.0, 750.0, 1250.0, 1750.0].contains(&p.y));
        }
        assert_eq!(grid.lines(), 9);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)), 5.0);
        // coincident points clamp at the singularity floor
        assert_eq!(distance(Vec2::new(5.0, 7.0), Vec2::new(5.0, 7.0)), D_MIN_M);
        let d = distance(Vec2::new(250.0, 250.0), Vec2::new(1750.0, 1750.0));
        assert!((d - 2121.32).abs() < 0.01);
    }

    #[test]
    fn distance_is_symmetric() {
        let a = Vec2::new(12.5, 900.0);
        let b = Vec2::new(1400.0, 3.0);
        assert_eq!(distance(a, b), distance(b, a));
    }

    #[test]
    fn spawn_zero_is_empty() {
        let grid = RoadGrid::paper_default();
        let vs = spawn_vehicles(0, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(1));
        assert!(vs.is_empty());
    }

    #[test]
    fn spawn_positions_are_contained_and_on_edges() {
        let grid = RoadGrid::paper_default();
        let vs = spawn_vehicles(45, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(3));
        assert_eq!(vs.len(), 45);
        for v in &vs {
            let p = v.position();
            assert!(in_extent(p, &grid));
            let on_h = (p.y / grid.block_length_m).fract().abs() < 1e-9;
            let on_v = (p.x / grid.block_length_m).fract().abs() < 1e-9;
            assert!(on_h || on_v, "vehicle off-road at {p:?}");
            assert!(v.speed_mps >= 8.0 && v.speed_mps < 14.0);
        }
    }

    #[test]
    fn spawn_is_deterministic() {
        let grid = RoadGrid::paper_default();
        let a = spawn_vehicles(45, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(9));
        let b = spawn_vehicles(45, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(9));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.position(), y.position());
            assert_eq!(x.heading, y.heading);
            assert_eq!(x.speed_mps, y.speed_mps);
        }
    }

    #[test]
    fn mid_edge_step_is_exact_kinematics() {
        let grid = RoadGrid::paper_default();
        let mut v = VehicleKinematics::new(0, Vec2::new(100.0, 250.0), Heading::East, 10.0, 0.0, 5);
        step(std::slice::from_mut(&mut v), &grid, 1.0).unwrap();
        let p = v.position();
        assert_eq!(p.x, 110.0);
        assert_eq!(p.y, 250.0);
    }

    #[test]
    fn zero_step_is_rejected() {
        let grid = RoadGrid::paper_default();
        let mut vs = spawn_vehicles(1, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(2));
        assert!(step(&mut vs, &grid, 0.0).is_err());
        assert!(step(&mut vs, &grid, -1.0).is_err());
    }

    #[test]
    fn trajectories_are_independent_of_observation_times() {
        let grid = RoadGrid::paper_default();
        let mk = || VehicleKinematics::new(0, Vec2::new(620.0, 500.0), Heading::East, 13.0, 0.0, 42);
        let mut a = mk();
        let mut b = mk();
        a.advance_to(300.0, &grid);
        // b takes many small, irregular steps to the same time
        let mut t = 0.0;
        for i in 0..999 {
            t += 0.3 + (i % 7) as f64 * 0.001;
            b.advance_to(t.min(300.0), &grid);
        }
        b.advance_to(300.0, &grid);
        let (pa, pb) = (a.position(), b.position());
        assert_eq!(pa.x, pb.x);
        assert_eq!(pa.y, pb.y);
        assert_eq!(a.heading, b.heading);
    }

    #[test]
    fn corner_turns_never_leave_grid() {
        let grid = RoadGrid::paper_default();
        // heading straight into the (2000, 0) corner
        let mut v =
            VehicleKinematics::new(0, Vec2::new(1990.0, 0.0), Heading::East, 10.0, 0.0, 11);
        v.advance_to(5.0, &grid);
        assert!(in_extent(v.position(), &grid));
        assert_ne!(v.heading, Heading::East);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn containment_holds_under_long_runs(seed in 0u64..1000, steps in 1usize..40) {
            let grid = RoadGrid::paper_default();
            let mut vs = spawn_vehicles(8, 0, 0.0, &grid, (8.0, 14.0), &mut fixed_rng(seed));
            for k in 1..=steps {
                step(&mut vs, &grid, 7.3 + (k % 3) as f64).unwrap();
                for v in &vs {
                    prop_assert!(in_extent(v.position(), &grid));
                }
            }
        }

        #[test]
        fn distance_symmetry(ax in 0.0..2000.0f64, ay in 0.0..2000.0f64,
                             bx in 0.0..2000.0f64, by in 0.0..2000.0f64) {
            let a = Vec2::new(ax, ay);
            let b = Vec2::new(bx, by);
            prop_assert_eq!(distance(a, b), distance(b, a));
        }
    }
}
