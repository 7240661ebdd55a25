#include "synthweave/rrp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "synthweave/kernels.hpp"

namespace synthweave::rrp {

namespace {
// sub-seed tags for the independent generator streams
constexpr std::uint64_t kTreeStream = 0x7272705f74726565ULL;
constexpr std::uint64_t kLeafStream = 0x7272705f6c656166ULL;
}  // namespace

void DistanceContext::pack() {
    const std::size_t n = table->n_rows();
    width = table->n_cols();
    packed.assign(n * width, std::numeric_limits<double>::quiet_NaN());
    bool any_missing = false;
    for (std::size_t r = 0; r < n; ++r) {
        const Row& row = table->row(r);
        for (std::size_t c = 0; c < width; ++c) {
            if (row[c].is_number())
                packed[r * width + c] = scaler->normalized_value(c, row[c].num());
            else if (row[c].is_category())
                packed[r * width + c] = static_cast<double>(row[c].cat());
            else
                any_missing = true;
        }
    }
    bool all_numeric = true;
    for (const auto& col : table->schema().columns)
        all_numeric = all_numeric && col.kind == ColumnKind::Numeric;
    fast_euclidean = p == 2.0 && all_numeric && !any_missing;
}

namespace {

double packed_pair_distance(const double* x, const double* y,
                            const std::vector<ColumnSpec>& columns, std::size_t width,
                            double p) {
    double acc = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
        double delta;
        if (std::isnan(x[c]) || std::isnan(y[c])) {
            delta = (std::isnan(x[c]) && std::isnan(y[c])) ? 0.0 : 1.0;
        } else if (columns[c].kind == ColumnKind::Numeric) {
            delta = std::fabs(x[c] - y[c]);
        } else {
            delta = x[c] == y[c] ? 0.0 : 1.0;
        }
        if (delta == 0.0) continue;
        if (p == 2.0) acc += delta * delta;
        else if (p == 1.0) acc += delta;
        else acc += std::pow(delta, p);
    }
    if (acc == 0.0) return 0.0;
    if (p == 2.0) return std::sqrt(acc);
    if (p == 1.0) return acc;
    return std::pow(acc, 1.0 / p);
}

}  // namespace

double DistanceContext::packed_distance(std::uint32_t i, std::uint32_t j) const {
    return packed_pair_distance(packed.data() + static_cast<std::size_t>(i) * width,
                                packed.data() + static_cast<std::size_t>(j) * width,
                                table->schema().columns, width, p);
}

void RrpConfig::validate() const {
    if (leaf_threshold < 2) throw std::invalid_argument("rrp: leaf threshold must be >= 2");
    if (!(scale_factor >= 0.0 && scale_factor <= 1.0))
        throw std::invalid_argument("rrp: F must lie in [0,1]");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
        throw std::invalid_argument("rrp: CR must lie in [0,1]");
    if (!(distance_p > 0.0)) throw std::invalid_argument("rrp: p must be > 0");
}

SplitResult split(const std::vector<std::uint32_t>& indices, const DistanceContext& ctx,
                  Rng& rng) {
    const std::size_t n = indices.size();
    if (n < 2) throw std::invalid_argument("rrp::split: need at least 2 indices");

    const std::uint32_t pivot = indices[rng.next_index(n)];

    auto from_pivot = kernels::distances_from(indices, pivot, ctx);
    ctx.distance_calls += n;
    const std::uint32_t east_pole = indices[kernels::argmax(from_pivot)];

    // distances to the east pole double as the `a` leg of the projection
    auto a = kernels::distances_from(indices, east_pole, ctx);
    ctx.distance_calls += n;
    const std::size_t west_pos = kernels::argmax(a);
    const std::uint32_t west_pole = indices[west_pos];
    const double c = a[west_pos];

    SplitResult result;
    const std::size_t n_east = (n + 1) / 2;
    if (c == 0.0) {
        // all pairwise distances are zero; the cosine rule is undefined,
        // halve by index order instead
        result.degenerate = true;
        std::vector<std::uint32_t> sorted(indices);
        std::sort(sorted.begin(), sorted.end());
        result.east.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_east));
        result.west.assign(sorted.begin() + static_cast<std::ptrdiff_t>(n_east), sorted.end());
        return result;
    }

    auto b = kernels::distances_from(indices, west_pole, ctx);
    ctx.distance_calls += n;

    // (projection, row id) keys are unique, so the median key found by a
    // linear select defines the same east set as a full sort would; the
    // stable partition pass keeps the parent's row order in both halves
    std::vector<std::pair<double, std::uint32_t>> keys(n);
    for (std::size_t i = 0; i < n; ++i)
        keys[i] = {fastmap_projection(a[i], b[i], c), indices[i]};
    std::vector<std::pair<double, std::uint32_t>> order(keys);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_east),
                     order.end());
    const auto boundary = order[n_east];

    result.east.reserve(n_east);
    result.west.reserve(n - n_east);
    for (std::size_t i = 0; i < n; ++i)
        (keys[i] < boundary ? result.east : result.west).push_back(indices[i]);
    return result;
}

namespace {

/// Working copy for the packed recursion. Rows are physically reordered
/// with every split so each node occupies one contiguous block and the
/// deep-level scans stay cache-local. The two row/id buffers alternate as
/// source and destination per tree level. Slot order mirrors what the
/// vector-based recursion would hold, so both paths grow identical trees.
struct ClusterWorkspace {
    std::size_t width = 0;
    std::vector<double> rows[2];
    std::vector<std::uint32_t> ids[2];
    std::vector<double> dist_pivot, dist_a;
    std::vector<std::pair<double, std::uint32_t>> keys;
    std::vector<std::pair<double, std::uint32_t>> key_scratch;
};

void fill_distances(const ClusterWorkspace& ws, int side, const DistanceContext& ctx,
                    std::size_t lo, std::size_t hi, std::size_t origin,
                    std::vector<double>& out) {
    const std::vector<double>& rows = ws.rows[side];
    const double* origin_row = rows.data() + origin * ws.width;
    const std::size_t width = ws.width;
    // serial on purpose: the scans are bandwidth-bound and block-local, so
    // threading them contends with the leaf-synthesis parallelism instead
    // of helping
    if (ctx.fast_euclidean) {
        for (std::size_t slot = lo; slot < hi; ++slot) {
            const double* row = rows.data() + slot * width;
            double acc = 0.0;
            for (std::size_t c = 0; c < width; ++c) {
                const double diff = row[c] - origin_row[c];
                acc += diff * diff;
            }
            out[slot] = acc == 0.0 ? 0.0 : std::sqrt(acc);
        }
    } else {
        const auto& columns = ctx.table->schema().columns;
        for (std::size_t slot = lo; slot < hi; ++slot)
            out[slot] = packed_pair_distance(rows.data() + slot * ws.width, origin_row, columns,
                                             ws.width, ctx.p);
    }
    ctx.distance_calls += hi - lo;
}

std::size_t argmax_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo + 1; i < hi; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

/// One bisection over slots [lo, hi) of buffer `side`: same
/// pivot/pole/median rules as split(), but partitioning the rows
/// physically into the other buffer. Returns the east size.
std::size_t split_range(ClusterWorkspace& ws, int side, const DistanceContext& ctx,
                        std::size_t lo, std::size_t hi, Rng& rng) {
    const std::size_t n = hi - lo;
    const std::size_t n_east = (n + 1) / 2;
    const std::size_t pivot = lo + rng.next_index(n);

    fill_distances(ws, side, ctx, lo, hi, pivot, ws.dist_pivot);
    const std::size_t east_pole = argmax_range(ws.dist_pivot, lo, hi);
    fill_distances(ws, side, ctx, lo, hi, east_pole, ws.dist_a);
    const std::size_t west_pole = argmax_range(ws.dist_a, lo, hi);
    const double c = ws.dist_a[west_pole];

    const std::vector<double>& src_rows = ws.rows[side];
    const std::vector<std::uint32_t>& src_ids = ws.ids[side];
    std::vector<double>& dst_rows = ws.rows[1 - side];
    std::vector<std::uint32_t>& dst_ids = ws.ids[1 - side];
    auto move_row = [&](std::size_t src, std::size_t dst) {
        std::copy(src_rows.begin() + static_cast<std::ptrdiff_t>(src * ws.width),
                  src_rows.begin() + static_cast<std::ptrdiff_t>((src + 1) * ws.width),
                  dst_rows.begin() + static_cast<std::ptrdiff_t>(dst * ws.width));
        dst_ids[dst] = src_ids[src];
    };

    if (c == 0.0) {
        // degenerate: sort the block by ascending row id and halve it
        std::vector<std::size_t> slots(n);
        std::iota(slots.begin(), slots.end(), lo);
        std::sort(slots.begin(), slots.end(),
                  [&](std::size_t x, std::size_t y) { return src_ids[x] < src_ids[y]; });
        for (std::size_t i = 0; i < n; ++i) move_row(slots[i], lo + i);
        return n_east;
    }

    // the third scan feeds straight into the projection keys
    {
        const double* west_row = src_rows.data() + west_pole * ws.width;
        for (std::size_t slot = lo; slot < hi; ++slot) {
            double b;
            if (ctx.fast_euclidean) {
                const double* row = src_rows.data() + slot * ws.width;
                double acc = 0.0;
                for (std::size_t col = 0; col < ws.width; ++col) {
                    const double diff = row[col] - west_row[col];
                    acc += diff * diff;
                }
                b = acc == 0.0 ? 0.0 : std::sqrt(acc);
            } else {
                b = packed_pair_distance(src_rows.data() + slot * ws.width, west_row,
                                         ctx.table->schema().columns, ws.width, ctx.p);
            }
            ws.keys[slot] = {fastmap_projection(ws.dist_a[slot], b, c), src_ids[slot]};
        }
        ctx.distance_calls += n;
    }

    ws.key_scratch.assign(ws.keys.begin() + static_cast<std::ptrdiff_t>(lo),
                          ws.keys.begin() + static_cast<std::ptrdiff_t>(hi));
    std::nth_element(ws.key_scratch.begin(),
                     ws.key_scratch.begin() + static_cast<std::ptrdiff_t>(n_east),
                     ws.key_scratch.end());
    const auto boundary = ws.key_scratch[n_east];

    std::size_t east_at = lo, west_at = lo + n_east;
    for (std::size_t i = lo; i < hi; ++i)
        move_row(i, ws.keys[i] < boundary ? east_at++ : west_at++);
    return n_east;
}

std::unique_ptr<ClusterNode> cluster_range(ClusterWorkspace& ws, int side,
                                           const DistanceContext& ctx, std::size_t lo,
                                           std::size_t hi, std::size_t leaf_threshold,
                                           Rng& rng) {
    auto node = std::make_unique<ClusterNode>();
    node->indices.assign(ws.ids[side].begin() + static_cast<std::ptrdiff_t>(lo),
                         ws.ids[side].begin() + static_cast<std::ptrdiff_t>(hi));
    if (hi - lo > leaf_threshold) {
        const std::size_t n_east = split_range(ws, side, ctx, lo, hi, rng);
        node->left = cluster_range(ws, 1 - side, ctx, lo, lo + n_east, leaf_threshold, rng);
        node->right = cluster_range(ws, 1 - side, ctx, lo + n_east, hi, leaf_threshold, rng);
    }
    return node;
}

std::unique_ptr<ClusterNode> cluster_rowwise(std::vector<std::uint32_t> indices,
                                             const DistanceContext& ctx,
                                             std::size_t leaf_threshold, Rng& rng) {
    auto node = std::make_unique<ClusterNode>();
    node->indices = std::move(indices);
    if (node->indices.size() > leaf_threshold) {
        auto halves = split(node->indices, ctx, rng);
        node->left = cluster_rowwise(std::move(halves.east), ctx, leaf_threshold, rng);
        node->right = cluster_rowwise(std::move(halves.west), ctx, leaf_threshold, rng);
    }
    return node;
}

}  // namespace

std::unique_ptr<ClusterNode> cluster(std::vector<std::uint32_t> indices,
                                     const DistanceContext& ctx, std::size_t leaf_threshold,
                                     Rng& rng) {
    if (indices.empty()) throw std::invalid_argument("rrp::cluster: need at least 1 index");
    if (ctx.packed.empty() || indices.size() <= leaf_threshold)
        return cluster_rowwise(std::move(indices), ctx, leaf_threshold, rng);

    ClusterWorkspace ws;
    ws.width = ctx.width;
    const std::size_t n = indices.size();
    ws.rows[0].resize(n * ws.width);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(ctx.packed.begin() + static_cast<std::ptrdiff_t>(indices[i] * ws.width),
                  ctx.packed.begin() + static_cast<std::ptrdiff_t>((indices[i] + 1) * ws.width),
                  ws.rows[0].begin() + static_cast<std::ptrdiff_t>(i * ws.width));
    ws.ids[0] = std::move(indices);
    ws.rows[1].resize(n * ws.width);
    ws.ids[1].resize(n);
    ws.dist_pivot.resize(n);
    ws.dist_a.resize(n);
    ws.keys.resize(n);
    return cluster_range(ws, 0, ctx, 0, n, leaf_threshold, rng);
}

std::vector<const ClusterNode*> collect_leaves(const ClusterNode& root) {
    std::vector<const ClusterNode*> leaves;
    std::vector<const ClusterNode*> stack{&root};
    while (!stack.empty()) {
        const ClusterNode* node = stack.back();
        stack.pop_back();
        if (node->is_leaf()) {
            leaves.push_back(node);
        } else {
            stack.push_back(node->right.get());
            stack.push_back(node->left.get());
        }
    }
    return leaves;
}

std::vector<std::size_t> allocate_proportional(const std::vector<std::size_t>& leaf_sizes,
                                               std::size_t n_out) {
    const double total = static_cast<double>(std::accumulate(leaf_sizes.begin(), leaf_sizes.end(),
                                                             std::size_t{0}));
    std::vector<std::size_t> alloc(leaf_sizes.size(), 0);
    if (n_out == 0 || leaf_sizes.empty()) return alloc;

    std::vector<std::pair<double, std::size_t>> remainders(leaf_sizes.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < leaf_sizes.size(); ++i) {
        const double quota =
            static_cast<double>(n_out) * static_cast<double>(leaf_sizes[i]) / total;
        alloc[i] = static_cast<std::size_t>(std::floor(quota));
        assigned += alloc[i];
        remainders[i] = {quota - std::floor(quota), i};
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    for (std::size_t i = 0; assigned < n_out; ++i, ++assigned)
        ++alloc[remainders[i % remainders.size()].second];
    return alloc;
}

namespace {

/// Raw (unnormalized) cell matrix with leaf rows gathered into contiguous
/// blocks. Missing cells are NaN; categorical cells hold the id.
struct DonorMatrix {
    std::size_t width = 0;
    std::vector<double> cells;

    const double* row(std::size_t slot) const { return cells.data() + slot * width; }
    double* row(std::size_t slot) { return cells.data() + slot * width; }
};

double raw_cell(const Cell& cell) {
    if (cell.is_number()) return cell.num();
    if (cell.is_category()) return static_cast<double>(cell.cat());
    return std::numeric_limits<double>::quiet_NaN();
}

/// Difference-vector mutation with binomial crossover over one leaf block.
void synthesize_rows(const DonorMatrix& donors, std::size_t leaf_start, std::size_t leaf_size,
                     const Schema& schema, const Scaler& scaler, const RrpConfig& cfg,
                     std::size_t count, Rng& rng, DonorMatrix& out, std::size_t out_start) {
    const std::size_t cols = donors.width;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t pos_old = rng.next_index(leaf_size);
        std::size_t pos1, pos2, pos3;
        if (leaf_size >= 4) {
            do { pos1 = rng.next_index(leaf_size); } while (pos1 == pos_old);
            do { pos2 = rng.next_index(leaf_size); } while (pos2 == pos_old || pos2 == pos1);
            do {
                pos3 = rng.next_index(leaf_size);
            } while (pos3 == pos_old || pos3 == pos1 || pos3 == pos2);
        } else {
            // tiny leaf: draw donors with replacement
            pos1 = rng.next_index(leaf_size);
            pos2 = rng.next_index(leaf_size);
            pos3 = rng.next_index(leaf_size);
        }
        const double* x_old = donors.row(leaf_start + pos_old);
        const double* x1 = donors.row(leaf_start + pos1);
        const double* x2 = donors.row(leaf_start + pos2);
        const double* x3 = donors.row(leaf_start + pos3);

        const std::size_t forced = rng.next_index(cols);
        double* y = out.row(out_start + j);
        for (std::size_t i = 0; i < cols; ++i) {
            const double r = rng.next_double();
            const bool mutate = r < cfg.crossover_prob || i == forced;
            if (!mutate) {
                y[i] = x_old[i];
            } else if (schema.columns[i].kind == ColumnKind::Categorical) {
                y[i] = x1[i];  // donor value; difference arithmetic has no meaning here
            } else if (!std::isnan(x1[i]) && !std::isnan(x2[i]) && !std::isnan(x3[i])) {
                const double v = x1[i] + cfg.scale_factor * (x2[i] - x3[i]);
                const auto& range = scaler.range(i);
                y[i] = std::clamp(v, range.min, range.max);
            } else {
                y[i] = x1[i];  // missing donors: no arithmetic possible
            }
        }
    }
}

}  // namespace

Table synthesize(const Table& t, std::size_t n_out, const RrpConfig& config, std::uint64_t seed) {
    config.validate();
    Table out = t.empty_like();
    if (n_out == 0) return out;
    if (t.n_rows() < 4)
        throw std::invalid_argument("rrp::synthesize: need at least 4 rows");

    const Scaler scaler = fit_scaler(t);
    DistanceContext ctx;
    ctx.table = &t;
    ctx.scaler = &scaler;
    ctx.p = config.distance_p;
    ctx.pack();

    std::vector<std::uint32_t> all(t.n_rows());
    std::iota(all.begin(), all.end(), 0u);
    Rng tree_rng(mix_seed({seed, kTreeStream}));
    const auto tree = cluster(std::move(all), ctx, config.leaf_threshold, tree_rng);
    const auto leaves = collect_leaves(*tree);

    std::vector<std::size_t> sizes(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) sizes[i] = leaves[i]->indices.size();
    const auto alloc = allocate_proportional(sizes, n_out);

    std::vector<std::size_t> out_offsets(leaves.size() + 1, 0);
    std::vector<std::size_t> leaf_offsets(leaves.size() + 1, 0);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        out_offsets[i + 1] = out_offsets[i] + alloc[i];
        leaf_offsets[i + 1] = leaf_offsets[i] + sizes[i];
    }

    // flatten the table once in row order, then gather donor rows leaf by
    // leaf so generation reads contiguous blocks
    const std::size_t cols = t.n_cols();
    DonorMatrix raw{cols, std::vector<double>(t.n_rows() * cols)};
    for (std::size_t r = 0; r < t.n_rows(); ++r)
        for (std::size_t c = 0; c < cols; ++c) raw.row(r)[c] = raw_cell(t.row(r)[c]);

    DonorMatrix donors{cols, std::vector<double>(t.n_rows() * cols)};
    {
        std::size_t slot = 0;
        for (const auto* leaf : leaves)
            for (std::uint32_t id : leaf->indices)
                std::copy(raw.row(id), raw.row(id) + cols, donors.row(slot++));
    }

    DonorMatrix output{cols, std::vector<double>(n_out * cols)};
    const auto n_leaves = static_cast<std::int64_t>(leaves.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t li = 0; li < n_leaves; ++li) {
        const auto i = static_cast<std::size_t>(li);
        if (alloc[i] == 0) continue;
        Rng leaf_rng(mix_seed({seed, kLeafStream, static_cast<std::uint64_t>(i)}));
        synthesize_rows(donors, leaf_offsets[i], sizes[i], t.schema(), scaler, config, alloc[i],
                        leaf_rng, output, out_offsets[i]);
    }

    for (std::size_t r = 0; r < n_out; ++r) {
        Row row(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = output.row(r)[c];
            if (std::isnan(v)) row[c] = Cell::missing();
            else if (t.schema().columns[c].kind == ColumnKind::Categorical)
                row[c] = Cell::category(static_cast<std::int32_t>(v));
            else
                row[c] = Cell::number(v);
        }
        out.add_row(std::move(row));
    }
    return out;
}

}  // namespace synthweave::rrp
