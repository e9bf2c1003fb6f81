use crate::error::{MapfError, Result};
use crate::instance::{Graph, VertexId};

/// A 4-connected grid graph plus the cell <-> vertex mapping.
///
/// Vertices are numbered row-major over the traversable cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Option<VertexId>>,
    coords: Vec<(usize, usize)>,
    graph: Graph,
}

impl GridMap {
    /// Builds a grid from a row-major `open` mask of `width * height` cells.
    pub fn from_mask(width: usize, height: usize, open: &[bool]) -> Result<Self> {
        if open.len() != width * height {
            return Err(MapfError::Usage(format!(
                "mask has {} cells, expected {width}x{height}",
                open.len()
            )));
        }
        let mut cells = vec![None; open.len()];
        let mut coords = Vec::new();
        for (i, _) in open.iter().enumerate().filter(|(_, &o)| o) {
            cells[i] = Some(coords.len());
            coords.push((i % width, i / width));
        }
        let mut graph = Graph::new(coords.len());
        for (v, &(x, y)) in coords.iter().enumerate() {
            if x + 1 < width {
                if let Some(w) = cells[y * width + x + 1] {
                    graph.add_edge(v, w)?;
                }
            }
            if y + 1 < height {
                if let Some(w) = cells[(y + 1) * width + x] {
                    graph.add_edge(v, w)?;
                }
            }
        }
        Ok(GridMap {
            width,
            height,
            cells,
            coords,
            graph,
        })
    }

    pub fn open(width: usize, height: usize) -> Self {
        Self::from_mask(width, height, &vec![true; width * height]).expect("mask has the right size")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    /// Vertex of cell `(x, y)`, or `None` if out of bounds or blocked.
    pub fn vertex_at(&self, x: usize, y: usize) -> Option<VertexId> {
        if x >= self.width || y >= self.height {
            return None;
        }
        self.cells[y * self.width + x]
    }

    pub fn cell_of(&self, v: VertexId) -> Option<(usize, usize)> {
        self.coords.get(v).copied()
    }

    pub fn is_in_bounds(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }
}

/// Parses a grid map: `type octile`, `height H`, `width W`, `map`, then `H`
/// rows of `W` characters. `.` and `G` are traversable, `@`, `T` and `O`
/// are blocked.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut height = None;
    let mut width = None;
    let mut saw_type = false;
    let mut last_line = 0;
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(MapfError::parse(last_line + 1, "missing `map` line"));
        };
        last_line = n;
        let mut words = line.split_whitespace();
        match (words.next(), words.next(), words.next()) {
            (None, ..) => continue,
            (Some("type"), Some(_), None) if n == 1 => saw_type = true,
            (Some("height"), Some(h), None) => height = Some(parse_dim(n, h)?),
            (Some("width"), Some(w), None) => width = Some(parse_dim(n, w)?),
            (Some("map"), None, None) => break,
            _ => return Err(MapfError::parse(n, format!("malformed header line `{line}`"))),
        }
    }
    if !saw_type {
        return Err(MapfError::parse(1, "missing `type` line"));
    }
    let height = height.ok_or_else(|| MapfError::parse(last_line, "missing `height` line"))?;
    let width = width.ok_or_else(|| MapfError::parse(last_line, "missing `width` line"))?;

    let mut open = Vec::with_capacity(width * height);
    for row in 0..height {
        let Some((n, line)) = lines.next() else {
            return Err(MapfError::parse(
                last_line + 1,
                format!("expected {height} rows, found {row}"),
            ));
        };
        last_line = n;
        if line.chars().count() != width {
            return Err(MapfError::parse(
                n,
                format!("row has {} cells, expected {width}", line.chars().count()),
            ));
        }
        for c in line.chars() {
            open.push(match c {
                '.' | 'G' => true,
                '@' | 'T' | 'O' => false,
                other => return Err(MapfError::parse(n, format!("unknown map character `{other}`"))),
            });
        }
    }
    if let Some((n, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(MapfError::parse(n, format!("unexpected line after the map: `{line}`")));
    }
    GridMap::from_mask(width, height, &open)
}

fn parse_dim(line: usize, text: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| MapfError::parse(line, format!("bad dimension `{text}`")))
}
