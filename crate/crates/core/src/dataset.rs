//! Loaders for citation corpora and co-view movie graphs, plus a planted
//! block generator for tests.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeFeatureMatrix};

/// A graph with node attributes and where it came from.
#[derive(Clone, Debug)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: Graph,
    pub features: NodeFeatureMatrix,
    /// Original identifier of each node.
    pub node_ids: Vec<String>,
    /// Class label per node when the source has one.
    pub labels: Vec<String>,
    /// `(file, sha256)` of every input read.
    pub provenance: Vec<(PathBuf, String)>,
    /// Link rows as they appear in the source, before dropping and dedup.
    pub raw_links: usize,
    /// Links dropped because an endpoint was unknown.
    pub dropped_links: usize,
}

impl DatasetBundle {
    /// Hash over graph structure and feature values.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.graph.content_hash().as_bytes());
        h.update(self.features.dim().to_le_bytes());
        for u in 0..self.features.node_count() {
            let row = self.features.row(u);
            for (c, x) in row.indices.iter().zip(row.values) {
                h.update(c.to_le_bytes());
                h.update(x.to_bits().to_le_bytes());
            }
            h.update(b";");
        }
        hex::encode(h.finalize())
    }
}

fn read_file(path: &Path) -> Result<(String, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    // some corpora are latin-1; ids and numbers are ASCII either way
    Ok((String::from_utf8_lossy(&bytes).into_owned(), hash))
}

/// Loads one `content`/`cites` pair; see [`load_citation_corpora`].
pub fn load_citation_corpus(name: &str, content: &Path, cites: &Path) -> Result<DatasetBundle> {
    load_citation_corpora(name, &[(content.to_path_buf(), cites.to_path_buf())])
}

/// Loads citation corpora split over several `content`/`cites` file pairs
/// into one graph. Content rows are `id feat_1 … feat_d label`; cite rows
/// are `id id`. Ids are strings, remapped densely in order of appearance.
/// Citations naming an unknown id are dropped and counted.
pub fn load_citation_corpora(name: &str, files: &[(PathBuf, PathBuf)]) -> Result<DatasetBundle> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut node_ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut provenance = Vec::new();
    for (content, _) in files {
        let (text, hash) = read_file(content)?;
        provenance.push((content.clone(), hash));
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 2 {
                return Err(Error::parse(content, i + 1, "expected 'id features... label'"));
            }
            let d = fields.len() - 2;
            match dim {
                None => dim = Some(d),
                Some(x) if x != d => {
                    return Err(Error::parse(
                        content,
                        i + 1,
                        format!("row has {d} features, earlier rows have {x}"),
                    ))
                }
                _ => {}
            }
            let mut row = Vec::new();
            for (j, f) in fields[1..=d].iter().enumerate() {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(content, i + 1, format!("bad feature value '{f}'")))?;
                if x != 0.0 {
                    row.push((j, x));
                }
            }
            let id = fields[0].to_string();
            if index.contains_key(&id) {
                return Err(Error::parse(content, i + 1, format!("duplicate id '{id}'")));
            }
            index.insert(id.clone(), node_ids.len());
            node_ids.push(id);
            labels.push(fields[d + 1].to_string());
            rows.push(row);
        }
    }
    let features = NodeFeatureMatrix::from_sparse_rows(dim.unwrap_or(0), rows)?;
    let mut edges = Vec::new();
    let (mut raw_links, mut dropped) = (0, 0);
    for (_, cites) in files {
        let (text, hash) = read_file(cites)?;
        provenance.push((cites.clone(), hash));
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 2 {
                return Err(Error::parse(cites, i + 1, "expected 'id id'"));
            }
            raw_links += 1;
            match (index.get(fields[0]), index.get(fields[1])) {
                (Some(&a), Some(&b)) => edges.push((a, b)),
                _ => dropped += 1,
            }
        }
    }
    if dropped > 0 {
        log::warn!("{name}: dropped {dropped} citations with unknown endpoints");
    }
    let graph = Graph::from_edges(node_ids.len(), &edges)?;
    Ok(DatasetBundle {
        name: name.to_string(),
        graph,
        features,
        node_ids,
        labels,
        provenance,
        raw_links,
        dropped_links: dropped,
    })
}

/// Movie attributes keyed by movie id.
#[derive(Clone, Debug)]
pub struct MovieTable {
    pub ids: Vec<String>,
    pub features: NodeFeatureMatrix,
    pub provenance: (PathBuf, String),
}

pub const MOVIELENS_GENRES: [&str; 18] = [
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

/// Reads `id::title::Genre|Genre` rows into 18 binary genre features.
pub fn read_genre_table(path: &Path) -> Result<MovieTable> {
    let (text, hash) = read_file(path)?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line
            .split_once("::")
            .ok_or_else(|| Error::parse(path, i + 1, "expected 'id::title::genres'"))?;
        let genres = rest
            .rsplit_once("::")
            .map(|x| x.1)
            .ok_or_else(|| Error::parse(path, i + 1, "expected 'id::title::genres'"))?;
        let mut row = Vec::new();
        for g in genres.split('|').map(str::trim).filter(|g| !g.is_empty()) {
            match MOVIELENS_GENRES.iter().position(|x| x.eq_ignore_ascii_case(g)) {
                Some(j) => row.push((j, 1.0)),
                None => log::warn!("{}:{}: unknown genre '{g}' ignored", path.display(), i + 1),
            }
        }
        row.sort_unstable_by_key(|x| x.0);
        row.dedup_by_key(|x| x.0);
        ids.push(id.trim().to_string());
        rows.push(row);
    }
    Ok(MovieTable {
        ids,
        features: NodeFeatureMatrix::from_sparse_rows(MOVIELENS_GENRES.len(), rows)?,
        provenance: (path.to_path_buf(), hash),
    })
}

/// Reads rows of `id x_1 … x_dim` (whitespace or comma separated).
pub fn read_dense_table(path: &Path, dim: usize) -> Result<MovieTable> {
    let (text, hash) = read_file(path)?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != dim + 1 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected an id and {dim} values, found {} fields", fields.len()),
            ));
        }
        let row = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad value '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        ids.push(fields[0].to_string());
        rows.push(row);
    }
    let features = if rows.is_empty() {
        NodeFeatureMatrix::zeros(0, dim)
    } else {
        NodeFeatureMatrix::from_dense(&rows)?
    };
    Ok(MovieTable {
        ids,
        features,
        provenance: (path.to_path_buf(), hash),
    })
}

fn split_rating_row(line: &str) -> Vec<&str> {
    if line.contains("::") {
        line.split("::").map(str::trim).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoviewOptions {
    pub min_common_viewers: usize,
    /// Use numeric movie ids `1..=max` as nodes `0..max`, so movies that
    /// nobody rated or that lack attributes still appear (with zero
    /// features). Otherwise nodes follow the attribute table order.
    pub numeric_id_range: bool,
}

/// Movie-movie graph with an edge iff at least `min_common_viewers` users
/// rated both. Ratings rows are `user movie [rating …]` separated by `::`,
/// commas or whitespace; a first line without digits is taken as a header.
pub fn build_coview_graph(
    name: &str,
    ratings: &Path,
    movies: &MovieTable,
    opts: CoviewOptions,
) -> Result<DatasetBundle> {
    if opts.min_common_viewers == 0 {
        return Err(Error::InvalidParameter("co-view threshold must be >= 1".into()));
    }
    let (node_ids, features, movie_node): (Vec<String>, NodeFeatureMatrix, HashMap<String, usize>) =
        if opts.numeric_id_range {
            let mut max_id = 0usize;
            for id in &movies.ids {
                let v: usize = id.parse().map_err(|_| {
                    Error::Config(format!("movie id '{id}' is not numeric; cannot use id range"))
                })?;
                if v == 0 {
                    return Err(Error::Config("numeric movie ids must start at 1".into()));
                }
                max_id = max_id.max(v);
            }
            let mut rows = vec![Vec::new(); max_id];
            let mut map = HashMap::new();
            for (k, id) in movies.ids.iter().enumerate() {
                let v: usize = id.parse().expect("checked above");
                let r = movies.features.row(k);
                rows[v - 1] = r.indices.iter().copied().zip(r.values.iter().copied()).collect();
            }
            for v in 1..=max_id {
                map.insert(v.to_string(), v - 1);
            }
            let ids = (1..=max_id).map(|v| v.to_string()).collect();
            (ids, NodeFeatureMatrix::from_sparse_rows(movies.features.dim(), rows)?, map)
        } else {
            let map = movies.ids.iter().enumerate().map(|(k, id)| (id.clone(), k)).collect();
            (movies.ids.clone(), movies.features.clone(), map)
        };

    let (text, hash) = read_file(ratings)?;
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut seen: Vec<Vec<u32>> = Vec::new();
    let mut dropped = 0usize;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f = split_rating_row(t);
        if f.len() < 2 {
            return Err(Error::parse(ratings, i + 1, "expected 'user movie [rating]'"));
        }
        if i == 0 && !f[1].chars().any(|c| c.is_ascii_digit()) {
            continue;
        }
        let Some(&m) = movie_node.get(f[1]) else {
            dropped += 1;
            continue;
        };
        let next = user_index.len();
        let u = *user_index.entry(f[0].to_string()).or_insert(next);
        if u == seen.len() {
            seen.push(Vec::new());
        }
        seen[u].push(m as u32);
    }
    if dropped > 0 {
        log::warn!("{name}: dropped {dropped} ratings of movies without attributes");
    }
    let mut counts: HashMap<u64, u32> = HashMap::new();
    for list in &mut seen {
        list.sort_unstable();
        list.dedup();
        for a in 0..list.len() {
            for b in a + 1..list.len() {
                *counts.entry(((list[a] as u64) << 32) | list[b] as u64).or_insert(0) += 1;
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c as usize >= opts.min_common_viewers)
        .map(|(k, _)| ((k >> 32) as usize, (k & 0xffff_ffff) as usize))
        .collect();
    edges.sort_unstable();
    let graph = Graph::from_edges(node_ids.len(), &edges)?;
    Ok(DatasetBundle {
        name: name.to_string(),
        labels: Vec::new(),
        graph,
        features,
        node_ids,
        provenance: vec![movies.provenance.clone(), (ratings.to_path_buf(), hash)],
        raw_links: edges.len(),
        dropped_links: dropped,
    })
}

/// Planted-partition graph: nodes of group `i` link with probability
/// `within_p` inside the group and `across_p` across. Each group owns four
/// feature columns set to 1.0, and every entry gets uniform noise in
/// `[0, 0.25)`.
pub fn synth_planted_blocks(
    groups: &[usize],
    within_p: f64,
    across_p: f64,
    seed: u64,
) -> Result<DatasetBundle> {
    for p in [within_p, across_p] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group: Vec<usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
        .collect();
    let n = group.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if group[u] == group[v] { within_p } else { across_p };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let dim = 4 * groups.len();
    let rows: Vec<Vec<f64>> = group
        .iter()
        .map(|&g| {
            (0..dim)
                .map(|j| f64::from(u8::from(j / 4 == g)) + 0.25 * rng.gen::<f64>())
                .collect()
        })
        .collect();
    let features = if n == 0 {
        NodeFeatureMatrix::zeros(0, dim)
    } else {
        NodeFeatureMatrix::from_dense(&rows)?
    };
    Ok(DatasetBundle {
        name: format!("planted-{}", groups.len()),
        graph: Graph::from_edges(n, &edges)?,
        features,
        node_ids: (0..n).map(|u| u.to_string()).collect(),
        labels: group.iter().map(|g| g.to_string()).collect(),
        provenance: Vec::new(),
        raw_links: edges.len(),
        dropped_links: 0,
    })
}

/// The benchmark corpora under their conventional directory layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corpus {
    Cora,
    CiteSeer,
    WebKb,
    MovieLens,
    Netflix,
}

/// Published `(nodes, links, attributes)` of a corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusShape {
    pub nodes: usize,
    pub links: usize,
    pub attributes: usize,
}

impl Corpus {
    pub const ALL: [Corpus; 5] = [
        Corpus::Cora,
        Corpus::CiteSeer,
        Corpus::WebKb,
        Corpus::MovieLens,
        Corpus::Netflix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Corpus::Cora => "cora",
            Corpus::CiteSeer => "citeseer",
            Corpus::WebKb => "webkb",
            Corpus::MovieLens => "movielens",
            Corpus::Netflix => "netflix",
        }
    }

    pub fn from_name(s: &str) -> Option<Corpus> {
        Corpus::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }

    pub fn shape(self) -> CorpusShape {
        let (nodes, links, attributes) = match self {
            Corpus::Cora => (2708, 5429, 1433),
            Corpus::CiteSeer => (3312, 4732, 3703),
            Corpus::WebKb => (877, 1608, 1703),
            Corpus::MovieLens => (3952, 5669, 18),
            Corpus::Netflix => (17770, 20466, 64),
        };
        CorpusShape {
            nodes,
            links,
            attributes,
        }
    }

    /// Expected files below `root`:
    /// `cora/cora.{content,cites}`, `citeseer/citeseer.{content,cites}`,
    /// `webkb/{cornell,texas,washington,wisconsin}.{content,cites}`,
    /// `movielens/{movies,ratings}.dat`, `netflix/{features.txt,ratings.txt}`.
    pub fn files(self, root: &Path) -> Vec<PathBuf> {
        let d = root.join(self.name());
        match self {
            Corpus::Cora | Corpus::CiteSeer => vec![
                d.join(format!("{}.content", self.name())),
                d.join(format!("{}.cites", self.name())),
            ],
            Corpus::WebKb => ["cornell", "texas", "washington", "wisconsin"]
                .iter()
                .flat_map(|s| [d.join(format!("{s}.content")), d.join(format!("{s}.cites"))])
                .collect(),
            Corpus::MovieLens => vec![d.join("movies.dat"), d.join("ratings.dat")],
            Corpus::Netflix => vec![d.join("features.txt"), d.join("ratings.txt")],
        }
    }

    pub fn available(self, root: &Path) -> bool {
        self.files(root).iter().all(|p| p.is_file())
    }

    pub fn load(self, root: &Path) -> Result<DatasetBundle> {
        let files = self.files(root);
        let bundle = match self {
            Corpus::Cora | Corpus::CiteSeer | Corpus::WebKb => {
                let pairs: Vec<(PathBuf, PathBuf)> = files
                    .chunks(2)
                    .map(|c| (c[0].clone(), c[1].clone()))
                    .collect();
                load_citation_corpora(self.name(), &pairs)?
            }
            Corpus::MovieLens => {
                let table = read_genre_table(&files[0])?;
                let opts = CoviewOptions {
                    min_common_viewers: 100,
                    numeric_id_range: true,
                };
                build_coview_graph(self.name(), &files[1], &table, opts)?
            }
            Corpus::Netflix => {
                let table = read_dense_table(&files[0], 64)?;
                let opts = CoviewOptions {
                    min_common_viewers: 20,
                    numeric_id_range: false,
                };
                build_coview_graph(self.name(), &files[1], &table, opts)?
            }
        };
        for m in self.shape_mismatches(&bundle) {
            log::warn!("{}: {m}", self.name());
        }
        Ok(bundle)
    }

    /// Differences between a loaded bundle and the published shape. Links
    /// are compared against the raw link rows of the source.
    pub fn shape_mismatches(self, b: &DatasetBundle) -> Vec<String> {
        let s = self.shape();
        let mut out = Vec::new();
        let got = [
            ("nodes", b.graph.node_count(), s.nodes),
            ("links", b.raw_links, s.links),
            ("attributes", b.features.dim(), s.attributes),
        ];
        for (what, have, want) in got {
            if have != want {
                out.push(format!("{what}: loaded {have}, published {want}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("linkpred-ds-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn toy_citation_corpus() {
        let d = tmpdir("toy");
        let c = write(&d, "t.content", "p1 1 0 1 A\np2 0 1 0 B\n");
        let e = write(&d, "t.cites", "p1 p2\np2 ghost\n");
        let b = load_citation_corpus("toy", &c, &e).unwrap();
        assert_eq!(b.graph.node_count(), 2);
        assert_eq!(b.graph.edge_count(), 1);
        assert_eq!(b.features.dim(), 3);
        assert_eq!(b.features.dense_row(0), vec![1.0, 0.0, 1.0]);
        assert_eq!(b.labels, vec!["A", "B"]);
        assert_eq!((b.raw_links, b.dropped_links), (2, 1));
        let h = b.content_hash();
        assert_eq!(h, load_citation_corpus("toy", &c, &e).unwrap().content_hash());
    }

    #[test]
    fn malformed_rows_report_line() {
        let d = tmpdir("bad");
        let c = write(&d, "t.content", "p1 1 0 A\np2 0 A\n");
        let e = write(&d, "t.cites", "p1 p2\n");
        match load_citation_corpus("bad", &c, &e) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let c = write(&d, "u.content", "p1 1 A\np2 0 A\n");
        let e = write(&d, "u.cites", "p1 p2\np1\n");
        match load_citation_corpus("bad", &c, &e) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coview_examples() {
        let d = tmpdir("coview");
        let movies = write(&d, "movies.dat", "1::A (1990)::Comedy\n2::B::Drama|Comedy\n3::C::Horror\n");
        let ratings = write(&d, "ratings.dat", "a::1::5\na::2::3\nb::1::4\nb::2::1\nb::3::2\nc::9::1\n");
        let table = read_genre_table(&movies).unwrap();
        assert_eq!(table.features.row(1).indices, &[4, 7]);
        let opts = CoviewOptions {
            min_common_viewers: 2,
            numeric_id_range: false,
        };
        let b = build_coview_graph("t", &ratings, &table, opts).unwrap();
        assert_eq!(b.graph.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(b.dropped_links, 1);
        let opts = CoviewOptions {
            min_common_viewers: 3,
            numeric_id_range: true,
        };
        let b = build_coview_graph("t", &ratings, &table, opts).unwrap();
        assert_eq!((b.graph.node_count(), b.graph.edge_count()), (3, 0));
        let csv = write(&d, "r.csv", "userId,movieId,rating\nx,1,1\ny,1,1\nx,3,1\ny,3,1\n");
        let opts = CoviewOptions {
            min_common_viewers: 2,
            numeric_id_range: false,
        };
        let b = build_coview_graph("t", &csv, &table, opts).unwrap();
        assert_eq!(b.graph.edges().collect::<Vec<_>>(), vec![(0, 2)]);
    }

    #[test]
    fn dense_table() {
        let d = tmpdir("dense");
        let p = write(&d, "f.txt", "7 0.5 1.5\n9,2,0\n");
        let t = read_dense_table(&p, 2).unwrap();
        assert_eq!(t.ids, vec!["7", "9"]);
        assert_eq!(t.features.dense_row(1), vec![2.0, 0.0]);
        assert!(read_dense_table(&p, 3).is_err());
    }

    #[test]
    fn planted_extremes() {
        let b = synth_planted_blocks(&[5, 5], 1.0, 0.0, 3).unwrap();
        assert_eq!(b.graph.edge_count(), 20);
        assert!(!b.graph.has_edge(0, 5));
        assert_eq!(b.features.dim(), 8);
        let again = synth_planted_blocks(&[5, 5], 1.0, 0.0, 3).unwrap();
        assert_eq!(b.content_hash(), again.content_hash());
        assert!(synth_planted_blocks(&[2], 1.5, 0.0, 0).is_err());
    }

    #[test]
    fn corpus_names_and_shapes() {
        assert_eq!(Corpus::from_name("Cora"), Some(Corpus::Cora));
        assert_eq!(Corpus::WebKb.shape().nodes, 877);
        assert_eq!(Corpus::WebKb.files(Path::new("/x")).len(), 8);
        assert!(!Corpus::Cora.available(Path::new("/nonexistent")));
    }
}
