use std::io::Write;

use super::{enumerate_metapaths, type_path_score, Hin, MetaPath};
use crate::corpus::{Role, TagSchema};
use crate::error::{Error, Result};

/// Dense `|A_e| × |A_t|` matrix, row-major, entity types by trigger types.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TypeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TypeMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(TypeMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn scaled(&self, factor: f64) -> TypeMatrix {
        TypeMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Type-aggregated co-occurrence counts: `M[u][v]` sums the weights of every
/// edge between an entity of type `u` and a trigger of type `v`.
pub fn direct_adjacency(hin: &Hin, schema: &TagSchema) -> Result<TypeMatrix> {
    let mut m = TypeMatrix::zeros(schema.entity_types().len(), schema.trigger_types().len());
    let lookup = |id: usize, role: Role| {
        let node = &hin.nodes()[id];
        schema.type_index(role, &node.node_type).ok_or_else(|| {
            Error::Graph(format!("node type {} is not a schema {role} type", node.node_type))
        })
    };
    for (e, t, w) in hin.edges() {
        let (u, v) = (lookup(e, Role::Entity)?, lookup(t, Role::Trigger)?);
        m.set(u, v, m.get(u, v) + w as f64);
    }
    Ok(m)
}

/// Direct matrix `M`, meta-path matrix `M′`, and the meta-paths behind `M′`.
///
/// `meta[u][v]` is `None` ("unreached") when no meta-path gives the pair a
/// positive score.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaPathMatrix {
    pub direct: TypeMatrix,
    pub meta: Vec<Vec<Option<f64>>>,
    pub path_set: Vec<MetaPath>,
}

/// `m′[u][v] = Σ_ρ log Pr_ρ(u, v)` over meta-paths from `u` to `v` with a
/// positive type-level score; the type-level score sums node-level scores
/// over all node pairs of types `(u, v)`.
pub fn metapath_adjacency(
    hin: &Hin,
    schema: &TagSchema,
    paths: &[MetaPath],
) -> Result<Vec<Vec<Option<f64>>>> {
    let mut meta = vec![vec![None; schema.trigger_types().len()]; schema.entity_types().len()];
    for rho in paths {
        let u = schema.type_index(Role::Entity, rho.first()).ok_or_else(|| {
            Error::MetaPath(format!("{rho} does not start at a schema entity type"))
        })?;
        let v = schema.type_index(Role::Trigger, rho.last()).ok_or_else(|| {
            Error::MetaPath(format!("{rho} does not end at a schema trigger type"))
        })?;
        let score = type_path_score(hin, rho);
        if score > 0.0 {
            let cell: &mut Option<f64> = &mut meta[u][v];
            *cell = Some(cell.unwrap_or(0.0) + score.ln());
        }
    }
    Ok(meta)
}

impl MetaPathMatrix {
    /// Enumerates every realized meta-path of `length` and builds both matrices.
    pub fn build(hin: &Hin, schema: &TagSchema, length: usize) -> Result<Self> {
        let direct = direct_adjacency(hin, schema)?;
        let path_set = enumerate_metapaths(hin, schema, length)?;
        let meta = metapath_adjacency(hin, schema, &path_set)?;
        Ok(MetaPathMatrix {
            direct,
            meta,
            path_set,
        })
    }

    /// CSV of `M`: header of trigger types, one row per entity type.
    pub fn write_direct_csv<W: Write>(&self, schema: &TagSchema, out: W) -> Result<()> {
        let cells: Vec<Vec<Option<f64>>> = self
            .direct
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(Some).collect())
            .collect();
        write_matrix_csv(schema, &cells, out)
    }

    /// CSV of `M′`; unreached cells are written as `unreached`.
    pub fn write_meta_csv<W: Write>(&self, schema: &TagSchema, out: W) -> Result<()> {
        write_matrix_csv(schema, &self.meta, out)
    }
}

fn write_matrix_csv<W: Write>(schema: &TagSchema, cells: &[Vec<Option<f64>>], out: W) -> Result<()> {
    let err = |e: csv::Error| Error::Graph(format!("writing matrix: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(schema.trigger_types().iter().cloned());
    w.write_record(&header).map_err(err)?;
    for (name, row) in schema.entity_types().iter().zip(cells) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|c| match c {
            Some(v) => format!("{v}"),
            None => "unreached".to_string(),
        }));
        w.write_record(&record).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Graph(format!("writing matrix: {e}")))?;
    Ok(())
}

/// Parses a matrix CSV written by [`MetaPathMatrix::write_meta_csv`].
pub fn read_matrix_csv(schema: &TagSchema, text: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let err = |e: csv::Error| Error::Graph(format!("reading matrix: {e}"));
    let header = reader.headers().map_err(err)?.clone();
    if header.iter().skip(1).ne(schema.trigger_types().iter().map(String::as_str)) {
        return Err(Error::Graph("matrix header does not match trigger types".into()));
    }
    let mut rows = Vec::new();
    for (record, name) in reader.records().zip(schema.entity_types()) {
        let record = record.map_err(err)?;
        if record.get(0) != Some(name.as_str()) {
            return Err(Error::Graph(format!("expected row for {name}")));
        }
        let row = record
            .iter()
            .skip(1)
            .map(|c| match c {
                "unreached" => Ok(None),
                v => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Graph(format!("bad matrix cell {v:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
