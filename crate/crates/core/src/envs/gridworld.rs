use super::planning::{FiniteMdp, Outcome};
use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_MAX_STEPS: usize = 100;

/// Actions: up, right, down, left. "Up" decreases the row.
const MOVES: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// Grid layout. Cells are `(column, row)`; the observation is the same pair as
/// reals and the state index is `column + width * row`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    start: (usize, usize),
    goal: (usize, usize),
}

impl GridMap {
    pub fn open(width: usize, height: usize, start: (usize, usize), goal: (usize, usize)) -> Result<Self> {
        Self::with_walls(width, height, start, goal, &[])
    }

    pub fn with_walls(
        width: usize,
        height: usize,
        start: (usize, usize),
        goal: (usize, usize),
        walls: &[(usize, usize)],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("grid must have positive width and height".into()));
        }
        let inside = |(c, r): (usize, usize)| c < width && r < height;
        if !inside(start) || !inside(goal) {
            return Err(Error::Config(format!("start {start:?} or goal {goal:?} outside the grid")));
        }
        if start == goal {
            return Err(Error::Config("start and goal must differ".into()));
        }
        let mut cells = vec![false; width * height];
        for &w in walls {
            if !inside(w) {
                return Err(Error::Config(format!("wall {w:?} outside the grid")));
            }
            if w == start || w == goal {
                return Err(Error::Config(format!("wall {w:?} covers the start or goal")));
            }
            cells[w.0 + width * w.1] = true;
        }
        Ok(Self {
            width,
            height,
            walls: cells,
            start,
            goal,
        })
    }

    /// Parses the text format: one row per line, `#` wall, `S` start, `G`
    /// goal, `.` free. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(Error::Config("empty grid map".into()));
        }
        let width = rows[0].chars().count();
        let (mut start, mut goal, mut walls) = (None, None, Vec::new());
        for (r, line) in rows.iter().enumerate() {
            if line.chars().count() != width {
                return Err(Error::Config(format!("grid row {r} has a different width")));
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '#' => walls.push((c, r)),
                    '.' => {}
                    'S' if start.is_none() => start = Some((c, r)),
                    'G' if goal.is_none() => goal = Some((c, r)),
                    'S' | 'G' => return Err(Error::Config(format!("duplicate `{ch}` in grid map"))),
                    other => return Err(Error::Config(format!("unexpected `{other}` in grid map"))),
                }
            }
        }
        let start = start.ok_or_else(|| Error::Config("grid map has no `S`".into()))?;
        let goal = goal.ok_or_else(|| Error::Config("grid map has no `G`".into()))?;
        Self::with_walls(width, rows.len(), start, goal, &walls)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn goal(&self) -> (usize, usize) {
        self.goal
    }

    pub fn is_wall(&self, cell: (usize, usize)) -> bool {
        self.walls[self.cell_index(cell)]
    }

    pub fn cell_index(&self, (c, r): (usize, usize)) -> usize {
        c + self.width * r
    }

    pub fn cell_of(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    /// Where `action` leads from `cell`; off-grid and wall moves stay put.
    pub fn next_cell(&self, cell: (usize, usize), action: usize) -> (usize, usize) {
        let (dc, dr) = MOVES[action];
        let c = cell.0 as i64 + dc;
        let r = cell.1 as i64 + dr;
        if c < 0 || r < 0 || c >= self.width as i64 || r >= self.height as i64 {
            return cell;
        }
        let next = (c as usize, r as usize);
        if self.is_wall(next) {
            cell
        } else {
            next
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gridworld {
    map: GridMap,
    spec: EnvSpec,
    step_reward: f64,
    goal_reward: f64,
    pos: (usize, usize),
    clock: EpisodeClock,
}

impl Gridworld {
    pub fn new(map: GridMap) -> Self {
        Self::with_rewards(map, -1.0, 0.0, DEFAULT_GRID_MAX_STEPS)
    }

    /// Every move costs `step_reward`; the move that reaches the goal pays
    /// `step_reward + goal_reward`.
    pub fn with_rewards(map: GridMap, step_reward: f64, goal_reward: f64, max_steps: usize) -> Self {
        let spec = EnvSpec {
            name: "gridworld".into(),
            state_dim: 2,
            action_count: 4,
            lows: vec![-0.5, -0.5],
            highs: vec![map.width as f64 - 0.5, map.height as f64 - 0.5],
            max_steps: max_steps.max(1),
            bins: vec![map.width, map.height],
        };
        let pos = map.start;
        Self {
            map,
            spec,
            step_reward,
            goal_reward,
            pos,
            clock: EpisodeClock::default(),
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    fn observe(cell: (usize, usize)) -> Vec<f64> {
        vec![cell.0 as f64, cell.1 as f64]
    }

    fn reward_for(&self, next: (usize, usize)) -> f64 {
        if next == self.map.goal {
            self.step_reward + self.goal_reward
        } else {
            self.step_reward
        }
    }
}

impl Environment for Gridworld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.clock.reset();
        self.pos = self.map.start;
        Self::observe(self.pos)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        let next = self.map.next_cell(self.pos, action);
        let reward = self.reward_for(next);
        self.pos = next;
        let (done, truncated) = self.clock.finish_step(self.spec.max_steps, next == self.map.goal);
        Ok(StepResult {
            next_state: Self::observe(next),
            reward,
            done,
            truncated,
        })
    }
}

impl FiniteMdp for Gridworld {
    fn state_count(&self) -> usize {
        self.map.width * self.map.height
    }

    fn action_count(&self) -> usize {
        4
    }

    fn is_terminal(&self, state: usize) -> bool {
        self.map.cell_of(state) == self.map.goal
    }

    fn outcomes(&self, state: usize, action: usize) -> Vec<Outcome> {
        let next = self.map.next_cell(self.map.cell_of(state), action);
        vec![Outcome {
            probability: 1.0,
            next: self.map.cell_index(next),
            reward: self.reward_for(next),
            terminal: next == self.map.goal,
        }]
    }

    fn state_index(&self, observation: &[f64]) -> Option<usize> {
        match observation {
            [c, r] if *c >= 0.0 && *r >= 0.0 => {
                let cell = (*c as usize, *r as usize);
                (cell.0 < self.map.width && cell.1 < self.map.height).then(|| self.map.cell_index(cell))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::value_iteration;

    #[test]
    fn one_step_corridor() {
        let map = GridMap::open(2, 1, (0, 0), (1, 0)).unwrap();
        let mut env = Gridworld::new(map);
        env.reset();
        let r = env.step(1).unwrap();
        assert_eq!(r.reward, -1.0);
        assert!(r.terminated());
        let q = value_iteration(&env, 1.0, 1e-12, 1000).unwrap();
        assert_eq!(q.value(0), -1.0);
    }

    #[test]
    fn open_four_by_four_optimal_return() {
        let env = Gridworld::new(GridMap::open(4, 4, (0, 0), (3, 3)).unwrap());
        let q = value_iteration(&env, 1.0, 1e-12, 10_000).unwrap();
        assert_eq!(q.value(0), -6.0);
    }

    #[test]
    fn wall_bump_keeps_position() {
        let map = GridMap::parse("S#.\n..G\n").unwrap();
        let mut env = Gridworld::new(map);
        let s0 = env.reset();
        let r = env.step(1).unwrap();
        assert_eq!(r.next_state, s0);
        assert_eq!(r.reward, -1.0);
        assert!(!r.done);
        // off-grid move
        let r = env.step(0).unwrap();
        assert_eq!(r.next_state, s0);
    }

    #[test]
    fn parse_rejects_malformed_maps() {
        assert!(GridMap::parse("").is_err());
        assert!(GridMap::parse("S..\n..").is_err());
        assert!(GridMap::parse("S.x\n..G").is_err());
        assert!(GridMap::parse("S..\n...").is_err());
        assert!(GridMap::parse("SS.\n..G").is_err());
        assert!(GridMap::open(3, 3, (1, 1), (1, 1)).is_err());
        assert!(GridMap::open(3, 3, (0, 0), (3, 1)).is_err());
    }

    #[test]
    fn parse_layout() {
        let map = GridMap::parse("S.#\n..G\n").unwrap();
        assert_eq!((map.width(), map.height()), (3, 2));
        assert_eq!(map.start(), (0, 0));
        assert_eq!(map.goal(), (2, 1));
        assert!(map.is_wall((2, 0)));
    }

    #[test]
    fn truncates_at_step_limit() {
        let map = GridMap::open(3, 3, (0, 0), (2, 2)).unwrap();
        let mut env = Gridworld::with_rewards(map, -1.0, 0.0, 3);
        env.reset();
        assert!(!env.step(0).unwrap().done);
        assert!(!env.step(0).unwrap().done);
        let last = env.step(0).unwrap();
        assert!(last.done && last.truncated && !last.terminated());
        assert!(env.step(0).is_err());
        env.reset();
        assert!(env.step(1).is_ok());
    }

    #[test]
    fn state_index_matches_cell_index() {
        let env = Gridworld::new(GridMap::open(5, 3, (0, 0), (4, 2)).unwrap());
        assert_eq!(env.state_index(&[3.0, 2.0]), Some(13));
        assert_eq!(env.state_index(&[5.0, 0.0]), None);
    }
}
