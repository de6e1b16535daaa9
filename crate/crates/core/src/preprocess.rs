//! Degreeing and sharding: raw edge list to destination-sorted sub-shards.
//!
//! Degreeing renumbers the (possibly sparse) raw vertex indices to dense ids
//! in ascending raw order, dropping indices that never appear on an edge, and
//! writes a pre-shard of renumbered edges. Sharding buckets the pre-shard into
//! `P²` spill files, then sorts each bucket by `(dst, src)` independently, so
//! working memory is bounded by one sub-shard.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tempfile::{NamedTempFile, TempDir};

use crate::error::{Error, IoContext, Result};
use crate::graph_model::{Edge, Partition, SubShardId, VertexId, DEFAULT_PARTITIONS};
use crate::storage::format::{self, VERTEX_ID_BYTES};
use crate::storage::manifest::{ManifestFiles, MANIFEST_VERSION};
use crate::storage::{
    ensure_dir, subshard_file_name, IoCategory, Manifest, ShardSetInfo, ShardSetKind, Storage, SubShardInfo,
};

/// Environment variable naming the directory for sharding spill files.
pub const TMPDIR_ENV: &str = "NXCORE_TMPDIR";

/// Upper bound on edges buffered in memory across all buckets before flushing.
const BUCKET_BUFFER_EDGES: usize = 1 << 22;

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub partitions: u32,
    /// Also write the symmetrized shard set (each edge plus its reverse).
    pub symmetrize: bool,
    /// Also write the transposed shard set.
    pub transpose: bool,
    /// Spill directory; falls back to `$NXCORE_TMPDIR`, then the system temp dir.
    pub spill_dir: Option<PathBuf>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            partitions: DEFAULT_PARTITIONS,
            symmetrize: false,
            transpose: false,
            spill_dir: None,
        }
    }
}

impl PreprocessOptions {
    pub fn with_partitions(partitions: u32) -> Self {
        PreprocessOptions {
            partitions,
            ..Self::default()
        }
    }

    fn spill_root(&self) -> PathBuf {
        self.spill_dir
            .clone()
            .or_else(|| std::env::var_os(TMPDIR_ENV).map(PathBuf::from))
            .unwrap_or_else(std::env::temp_dir)
    }
}

/// Raw index ↔ dense id mapping plus per-vertex degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    /// Raw index of each dense id; strictly ascending.
    reverse: Vec<u64>,
    /// `(in_degree, out_degree)` per dense id.
    degrees: Vec<(u32, u32)>,
}

impl IdMap {
    pub fn vertex_count(&self) -> u64 {
        self.reverse.len() as u64
    }

    pub fn id_of(&self, raw: u64) -> Option<VertexId> {
        self.reverse.binary_search(&raw).ok().map(|i| i as VertexId)
    }

    pub fn raw_of(&self, id: VertexId) -> Option<u64> {
        self.reverse.get(id as usize).copied()
    }

    pub fn reverse(&self) -> &[u64] {
        &self.reverse
    }

    pub fn degrees(&self) -> &[(u32, u32)] {
        &self.degrees
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        self.degrees.iter().map(|d| d.1).collect()
    }

    /// Reads `rmap.bin` and `deg.bin` of a preprocessed graph.
    pub fn load(dir: &Path, manifest: &Manifest, storage: &Storage) -> Result<Self> {
        let n = manifest.vertex_count as usize;
        let rpath = dir.join(&manifest.files.reverse_map);
        let rbytes = storage.read_file(&rpath, IoCategory::Metadata)?;
        if rbytes.len() != n * 8 {
            return Err(Error::corrupt("reverse-map", &rpath, "length does not match n"));
        }
        let reverse: Vec<u64> = rbytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if reverse.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::corrupt("reverse-map", &rpath, "indices not ascending"));
        }
        let degrees = load_degrees(dir, manifest, storage)?;
        Ok(IdMap { reverse, degrees })
    }
}

/// Reads `deg.bin` as `(in, out)` pairs.
pub fn load_degrees(dir: &Path, manifest: &Manifest, storage: &Storage) -> Result<Vec<(u32, u32)>> {
    let path = dir.join(&manifest.files.degrees);
    let bytes = storage.read_file(&path, IoCategory::Metadata)?;
    if bytes.len() as u64 != manifest.vertex_count * 8 {
        return Err(Error::corrupt("degree", &path, "length does not match n"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            (
                u32::from_le_bytes(c[..4].try_into().unwrap()),
                u32::from_le_bytes(c[4..].try_into().unwrap()),
            )
        })
        .collect())
}

/// Renumbered edge list spilled to a temporary file.
#[derive(Debug)]
pub struct PreShard {
    file: NamedTempFile,
    edge_count: u64,
}

impl PreShard {
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Streams the renumbered edges in input order.
    pub fn edges(&self) -> Result<impl Iterator<Item = Result<Edge>> + '_> {
        let path = self.file.path();
        let file = File::open(path).at(path)?;
        Ok(PairReader::<u32>::new(BufReader::with_capacity(1 << 16, file), path)
            .map(|r| r.map(|(s, d)| Edge::new(s, d))))
    }
}

/// Parses a whitespace-separated edge list.
///
/// Blank lines and lines starting with `#` or `%` are skipped.
pub fn parse_edge_list<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(u64, u64)>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i as u64 + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                return Some(Err(Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                }))
            }
        };
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            return None;
        }
        let mut fields = t.split_whitespace();
        let parsed = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => a.parse::<u64>().and_then(|s| b.parse::<u64>().map(|d| (s, d))),
            _ => {
                return Some(Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `src dst`, got {t:?}"),
                }))
            }
        };
        Some(parsed.map_err(|e| Error::Parse {
            line: line_no,
            message: format!("{e} in {t:?}"),
        }))
    })
}

/// Degreeing step: dense renumbering, degree counts, and the pre-shard.
pub fn degree<I>(edges: I, spill_dir: &Path) -> Result<(IdMap, PreShard)>
where
    I: IntoIterator<Item = Result<(u64, u64)>>,
{
    ensure_dir(spill_dir)?;
    let raw = NamedTempFile::new_in(spill_dir).at(spill_dir)?;
    let mut vertices: Vec<u64> = Vec::new();
    let mut compact_at = 1usize << 20;
    let mut m = 0u64;
    {
        let mut w = BufWriter::with_capacity(1 << 16, raw.as_file());
        for edge in edges {
            let (s, d) = edge?;
            w.write_all(&s.to_le_bytes()).at(raw.path())?;
            w.write_all(&d.to_le_bytes()).at(raw.path())?;
            vertices.push(s);
            vertices.push(d);
            m += 1;
            if vertices.len() >= compact_at {
                vertices.sort_unstable();
                vertices.dedup();
                compact_at = (vertices.len() * 2).max(1 << 20);
            }
        }
        w.flush().at(raw.path())?;
    }
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    vertices.sort_unstable();
    vertices.dedup();
    if vertices.len() as u64 > u32::MAX as u64 {
        return Err(Error::InvalidInput(format!(
            "{} vertices exceed the 32-bit id space",
            vertices.len()
        )));
    }

    let mut degrees = vec![(0u32, 0u32); vertices.len()];
    let pre = NamedTempFile::new_in(spill_dir).at(spill_dir)?;
    {
        let input = File::open(raw.path()).at(raw.path())?;
        let reader = PairReader::<u64>::new(BufReader::with_capacity(1 << 16, input), raw.path());
        let mut w = BufWriter::with_capacity(1 << 16, pre.as_file());
        let lookup = |x: u64| vertices.binary_search(&x).expect("index collected in pass one") as u32;
        for pair in reader {
            let (s, d) = pair?;
            let (s, d) = (lookup(s), lookup(d));
            let out = &mut degrees[s as usize].1;
            *out = out
                .checked_add(1)
                .ok_or_else(|| Error::InvalidInput("out-degree overflow".into()))?;
            let inn = &mut degrees[d as usize].0;
            *inn = inn
                .checked_add(1)
                .ok_or_else(|| Error::InvalidInput("in-degree overflow".into()))?;
            w.write_all(&s.to_le_bytes()).at(pre.path())?;
            w.write_all(&d.to_le_bytes()).at(pre.path())?;
        }
        w.flush().at(pre.path())?;
    }
    Ok((
        IdMap {
            reverse: vertices,
            degrees,
        },
        PreShard {
            file: pre,
            edge_count: m,
        },
    ))
}

/// Sharding step: writes the id maps, the forward (and optionally symmetrized)
/// shard set, and the manifest into `out_dir`.
pub fn shard(
    ids: &IdMap,
    pre_shard: &PreShard,
    out_dir: &Path,
    opts: &PreprocessOptions,
    storage: &Storage,
) -> Result<Manifest> {
    let n = ids.vertex_count();
    let partition = Partition::new(n, opts.partitions)?;
    ensure_dir(out_dir)?;
    let spill_root = opts.spill_root();
    ensure_dir(&spill_root)?;

    let files = ManifestFiles::default();
    write_id_files(ids, out_dir, &files, storage)?;

    let mut manifest = Manifest {
        version: MANIFEST_VERSION,
        id_base: 0,
        vertex_count: n,
        edge_count: pre_shard.edge_count(),
        partitions: opts.partitions,
        vertex_id_bytes: VERTEX_ID_BYTES as u32,
        attr_width: 8,
        intervals: partition.ranges().to_vec(),
        files,
        shard_sets: Default::default(),
    };

    let forward = build_shard_set(
        pre_shard.edges()?,
        &partition,
        out_dir,
        ShardSetKind::Forward,
        &spill_root,
        storage,
    )?;
    manifest.shard_sets.insert(ShardSetKind::Forward.name().into(), forward);

    if opts.symmetrize {
        let both = pre_shard.edges()?.flat_map(|e| match e {
            Ok(e) => vec![Ok(e), Ok(e.reversed())],
            Err(err) => vec![Err(err)],
        });
        let sym = build_shard_set(both, &partition, out_dir, ShardSetKind::Symmetric, &spill_root, storage)?;
        manifest.shard_sets.insert(ShardSetKind::Symmetric.name().into(), sym);
    }
    manifest.store(out_dir)?;
    Ok(manifest)
}

/// Writes the transposed shard set of an already preprocessed graph and
/// records it in the manifest.
pub fn transpose(graph_dir: &Path, opts: &PreprocessOptions, storage: &Storage) -> Result<ShardSetInfo> {
    let mut manifest = Manifest::load(graph_dir)?;
    let partition = manifest.partition()?;
    let spill_root = opts.spill_root();
    let mut reversed: Vec<Box<dyn Iterator<Item = Result<Edge>>>> = Vec::new();
    for id in partition.subshards() {
        let path = crate::storage::subshard_path(graph_dir, ShardSetKind::Forward, id);
        let stream = storage.read_subshard_stream(&path)?;
        reversed.push(Box::new(stream.map(|e| e.map(Edge::reversed))));
    }
    let info = build_shard_set(
        reversed.into_iter().flatten(),
        &partition,
        graph_dir,
        ShardSetKind::Transpose,
        &spill_root,
        storage,
    )?;
    manifest
        .shard_sets
        .insert(ShardSetKind::Transpose.name().into(), info.clone());
    manifest.store(graph_dir)?;
    Ok(info)
}

/// Degreeing plus sharding (plus optional transposition) in one call.
pub fn preprocess_edges<I>(edges: I, out_dir: &Path, opts: &PreprocessOptions, storage: &Storage) -> Result<Manifest>
where
    I: IntoIterator<Item = Result<(u64, u64)>>,
{
    let spill_root = opts.spill_root();
    let (ids, pre) = degree(edges, &spill_root)?;
    let mut manifest = shard(&ids, &pre, out_dir, opts, storage)?;
    drop(pre);
    if opts.transpose {
        transpose(out_dir, opts, storage)?;
        manifest = Manifest::load(out_dir)?;
    }
    Ok(manifest)
}

pub fn preprocess_file(input: &Path, out_dir: &Path, opts: &PreprocessOptions, storage: &Storage) -> Result<Manifest> {
    let file = File::open(input).at(input)?;
    preprocess_edges(parse_edge_list(BufReader::new(file)), out_dir, opts, storage)
}

fn write_id_files(ids: &IdMap, dir: &Path, files: &ManifestFiles, storage: &Storage) -> Result<()> {
    let pairs: Vec<(u64, u32)> = ids
        .reverse
        .iter()
        .enumerate()
        .map(|(id, &raw)| (raw, id as u32))
        .collect();
    storage.write_metadata(&dir.join(&files.map), &pairs, |(raw, id), out| {
        out.extend_from_slice(&raw.to_le_bytes());
        out.extend_from_slice(&id.to_le_bytes());
    })?;
    storage.write_metadata(&dir.join(&files.reverse_map), &ids.reverse, |raw, out| {
        out.extend_from_slice(&raw.to_le_bytes())
    })?;
    storage.write_metadata(&dir.join(&files.degrees), &ids.degrees, |(i, o), out| {
        out.extend_from_slice(&i.to_le_bytes());
        out.extend_from_slice(&o.to_le_bytes());
    })?;
    Ok(())
}

/// Looks up the dense id of a raw index by binary search over `map.bin`.
pub fn lookup_raw(dir: &Path, manifest: &Manifest, raw: u64) -> Result<Option<VertexId>> {
    let path = dir.join(&manifest.files.map);
    let bytes = fs::read(&path).at(&path)?;
    if bytes.len() as u64 != manifest.vertex_count * 12 {
        return Err(Error::corrupt("mapping", &path, "length does not match n"));
    }
    let entry = |i: usize| {
        let c = &bytes[i * 12..i * 12 + 12];
        (
            u64::from_le_bytes(c[..8].try_into().unwrap()),
            u32::from_le_bytes(c[8..].try_into().unwrap()),
        )
    };
    let (mut lo, mut hi) = (0usize, manifest.vertex_count as usize);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (r, id) = entry(mid);
        match r.cmp(&raw) {
            std::cmp::Ordering::Equal => return Ok(Some(id)),
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid,
        }
    }
    Ok(None)
}

/// Bucket-then-sort construction of one shard set.
fn build_shard_set<I>(
    edges: I,
    partition: &Partition,
    out_dir: &Path,
    kind: ShardSetKind,
    spill_root: &Path,
    storage: &Storage,
) -> Result<ShardSetInfo>
where
    I: Iterator<Item = Result<Edge>>,
{
    let p = partition.interval_count();
    let cells = (p as usize) * (p as usize);
    let spill = TempDir::new_in(spill_root).at(spill_root)?;
    let bucket_path = |cell: usize| spill.path().join(format!("bucket_{cell}.bin"));
    let per_bucket = (BUCKET_BUFFER_EDGES / cells).max(1024);
    let mut buckets: Vec<Vec<Edge>> = vec![Vec::new(); cells];

    let flush = |cell: usize, buf: &mut Vec<Edge>| -> Result<()> {
        let path = bucket_path(cell);
        let file = OpenOptions::new().create(true).append(true).open(&path).at(&path)?;
        let mut w = BufWriter::new(file);
        for e in buf.iter() {
            w.write_all(&e.src.to_le_bytes()).at(&path)?;
            w.write_all(&e.dst.to_le_bytes()).at(&path)?;
        }
        w.flush().at(&path)?;
        buf.clear();
        Ok(())
    };

    let mut total = 0u64;
    for edge in edges {
        let e = edge?;
        let id = partition.subshard_of(e)?;
        let cell = (id.src_interval * p + id.dst_interval) as usize;
        buckets[cell].push(e);
        total += 1;
        if buckets[cell].len() >= per_bucket {
            flush(cell, &mut buckets[cell])?;
        }
    }

    let set_dir = out_dir.join(kind.dir_name());
    ensure_dir(&set_dir)?;
    let subshards: Vec<SubShardInfo> = buckets
        .into_par_iter()
        .enumerate()
        .map(|(cell, mut edges)| -> Result<SubShardInfo> {
            let path = bucket_path(cell);
            if path.exists() {
                let file = File::open(&path).at(&path)?;
                for pair in PairReader::<u32>::new(BufReader::new(file), &path) {
                    let (s, d) = pair?;
                    edges.push(Edge::new(s, d));
                }
                fs::remove_file(&path).at(&path)?;
            }
            edges.sort_unstable_by_key(|e| (e.dst, e.src));
            let id = SubShardId::new(cell as u32 / p, cell as u32 % p);
            let file = subshard_file_name(id);
            let bytes = storage.write_subshard(&set_dir.join(&file), &edges)?;
            let dsts = edges.chunk_by(|a, b| a.dst == b.dst).count() as u64;
            debug_assert_eq!(bytes, format::subshard_size(dsts, edges.len() as u64));
            Ok(SubShardInfo {
                src: id.src_interval,
                dst: id.dst_interval,
                edges: edges.len() as u64,
                dsts,
                bytes,
                file,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ShardSetInfo {
        dir: kind.dir_name().into(),
        edges: total,
        subshards,
    })
}

/// Reads fixed-width little-endian pairs until EOF.
struct PairReader<'p, T> {
    inner: BufReader<File>,
    path: &'p Path,
    _width: std::marker::PhantomData<T>,
}

impl<'p, T> PairReader<'p, T> {
    fn new(inner: BufReader<File>, path: &'p Path) -> Self {
        PairReader {
            inner,
            path,
            _width: std::marker::PhantomData,
        }
    }
}

macro_rules! pair_reader {
    ($t:ty, $w:expr) => {
        impl Iterator for PairReader<'_, $t> {
            type Item = Result<($t, $t)>;
            fn next(&mut self) -> Option<Self::Item> {
                let mut buf = [0u8; 2 * $w];
                let mut filled = 0;
                while filled < buf.len() {
                    match self.inner.read(&mut buf[filled..]) {
                        Ok(0) if filled == 0 => return None,
                        Ok(0) => return Some(Err(Error::corrupt("spill", self.path, "truncated pair"))),
                        Ok(k) => filled += k,
                        Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                        Err(e) => return Some(Err(Error::io(self.path, e))),
                    }
                }
                let a = <$t>::from_le_bytes(buf[..$w].try_into().unwrap());
                let b = <$t>::from_le_bytes(buf[$w..].try_into().unwrap());
                Some(Ok((a, b)))
            }
        }
    };
}
pair_reader!(u32, 4);
pair_reader!(u64, 8);
