#include "podlstm/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "podlstm/errors.hpp"

namespace podlstm::io {

namespace {

constexpr char kTrajectoryMagic[] = "PODLTRAJ";
constexpr char kBasisMagic[] = "PODLBASI";
constexpr char kModelMagic[] = "PODLLSTM";
constexpr char kManifestMagic[] = "PODLMANI";

// Dimensions beyond this are corrupt headers, not data.
constexpr std::uint64_t kDimLimit = std::uint64_t{1} << 32;

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
        throw FormatError(path.string() + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in, const std::filesystem::path& path) {
    return std::bit_cast<double>(get_u64(in, path));
}

Eigen::Index get_dim(std::istream& in, const std::filesystem::path& path) {
    const std::uint64_t v = get_u64(in, path);
    if (v >= kDimLimit)
        throw FormatError(path.string() + ": implausible dimension in header");
    return static_cast<Eigen::Index>(v);
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

Eigen::MatrixXd get_matrix(std::istream& in, const std::filesystem::path& path,
                           Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = get_f64(in, path);
    if (!m.allFinite()) throw FormatError(path.string() + ": non-finite values in payload");
    return m;
}

Eigen::VectorXd get_vector(std::istream& in, const std::filesystem::path& path,
                           Eigen::Index size) {
    return get_matrix(in, path, size, 1);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string() + " for reading");
    return in;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
    if (!out) throw Error("write to " + path.string() + " failed");
}

void check_magic(std::istream& in, const char* expected, const std::filesystem::path& path) {
    char got[8];
    if (!in.read(got, 8)) throw FormatError(path.string() + ": truncated file");
    if (std::memcmp(got, expected, 8) != 0)
        throw FormatError(path.string() + ": bad magic bytes, expected " +
                          std::string(expected, 8));
    const std::uint64_t version = get_u64(in, path);
    if (version != kFormatVersion)
        throw FormatError(path.string() + ": unsupported format version " +
                          std::to_string(version));
}

void check_consumed(std::istream& in, const std::filesystem::path& path) {
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError(path.string() + ": trailing bytes after payload");
}

} // namespace

StateTrajectory TrajectoryFile::state_trajectory() const {
    if (states.rows() == 0)
        throw FormatError("trajectory file carries no states");
    StateTrajectory out{grid, states};
    out.validate();
    return out;
}

ParameterTrajectory TrajectoryFile::parameter_trajectory() const {
    if (params.rows() == 0)
        throw FormatError("trajectory file carries no parameters");
    ParameterTrajectory out{grid, params};
    out.validate();
    return out;
}

void save_trajectory(const std::filesystem::path& path, const TrajectoryFile& file) {
    file.grid.validate();
    if (file.states.rows() > 0 && file.states.cols() != file.grid.eta)
        throw ArgumentError("save_trajectory: state columns do not match grid");
    if (file.params.rows() > 0 && file.params.cols() != file.grid.eta)
        throw ArgumentError("save_trajectory: parameter columns do not match grid");
    if (!file.states.allFinite() || !file.params.allFinite())
        throw NumericError("save_trajectory: non-finite values");

    auto out = open_output(path);
    out.write(kTrajectoryMagic, 8);
    put_u64(out, kFormatVersion);
    put_u64(out, static_cast<std::uint64_t>(file.states.rows()));
    put_u64(out, static_cast<std::uint64_t>(file.grid.eta));
    put_u64(out, static_cast<std::uint64_t>(file.params.rows()));
    put_f64(out, file.grid.dt);
    put_f64(out, file.grid.t_start);
    put_matrix(out, file.states);
    put_matrix(out, file.params);
    check_written(out, path);
}

TrajectoryFile load_trajectory(const std::filesystem::path& path) {
    auto in = open_input(path);
    check_magic(in, kTrajectoryMagic, path);
    const Eigen::Index n = get_dim(in, path);
    const Eigen::Index eta = get_dim(in, path);
    const Eigen::Index ell = get_dim(in, path);
    TrajectoryFile file;
    file.grid.dt = get_f64(in, path);
    file.grid.t_start = get_f64(in, path);
    file.grid.eta = static_cast<int>(eta);
    if (eta < 1 || !(file.grid.dt > 0.0))
        throw FormatError(path.string() + ": invalid time grid in header");
    file.states = get_matrix(in, path, n, eta);
    file.params = get_matrix(in, path, ell, eta);
    check_consumed(in, path);
    return file;
}

void save_basis(const std::filesystem::path& path, const reduction::ReducedBasis& basis) {
    if (basis.centered())
        throw ConfigError("save_basis: the basis file format has no slot for a snapshot mean; "
                          "centered bases cannot be persisted");
    if (basis.basis.size() == 0) throw ArgumentError("save_basis: empty basis");
    if (!basis.basis.allFinite() || !basis.singular_values.allFinite())
        throw NumericError("save_basis: non-finite values");

    auto out = open_output(path);
    out.write(kBasisMagic, 8);
    put_u64(out, kFormatVersion);
    put_u64(out, static_cast<std::uint64_t>(basis.basis.rows()));
    put_u64(out, static_cast<std::uint64_t>(basis.basis.cols()));
    put_u64(out, static_cast<std::uint64_t>(basis.singular_values.size()));
    put_matrix(out, basis.basis);
    put_matrix(out, basis.singular_values);
    check_written(out, path);
}

reduction::ReducedBasis load_basis(const std::filesystem::path& path) {
    auto in = open_input(path);
    check_magic(in, kBasisMagic, path);
    const Eigen::Index n = get_dim(in, path);
    const Eigen::Index r = get_dim(in, path);
    const Eigen::Index d = get_dim(in, path);
    if (n < 1 || r < 1 || r > n || d < r)
        throw FormatError(path.string() + ": inconsistent basis dimensions");
    reduction::ReducedBasis basis;
    basis.basis = get_matrix(in, path, n, r);
    basis.singular_values = get_vector(in, path, d);
    check_consumed(in, path);
    return basis;
}

void save_model(const std::filesystem::path& path, const lstm::LstmModel& model) {
    model.validate();
    auto out = open_output(path);
    out.write(kModelMagic, 8);
    put_u64(out, kFormatVersion);
    put_u64(out, static_cast<std::uint64_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        put_u64(out, static_cast<std::uint64_t>(layer.input_size()));
        put_u64(out, static_cast<std::uint64_t>(layer.hidden_size()));
    }
    put_u64(out, static_cast<std::uint64_t>(model.window_length));
    put_u64(out, model.has_output_layer ? 1 : 0);
    put_u64(out, static_cast<std::uint64_t>(model.output_size()));
    for (const auto& layer : model.layers) {
        put_matrix(out, layer.w_f);
        put_matrix(out, layer.w_i);
        put_matrix(out, layer.w_c);
        put_matrix(out, layer.w_o);
        put_matrix(out, layer.b_f);
        put_matrix(out, layer.b_i);
        put_matrix(out, layer.b_c);
        put_matrix(out, layer.b_o);
    }
    if (model.has_output_layer) {
        put_matrix(out, model.output_weight);
        put_matrix(out, model.output_bias);
    }
    put_matrix(out, model.normalization.input_shift);
    put_matrix(out, model.normalization.input_scale);
    put_matrix(out, model.normalization.target_shift);
    put_matrix(out, model.normalization.target_scale);
    check_written(out, path);
}

lstm::LstmModel load_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    check_magic(in, kModelMagic, path);
    const Eigen::Index layer_count = get_dim(in, path);
    if (layer_count < 1)
        throw FormatError(path.string() + ": model has no layers");
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
    shapes.reserve(static_cast<std::size_t>(layer_count));
    for (Eigen::Index l = 0; l < layer_count; ++l) {
        const Eigen::Index n_x = get_dim(in, path);
        const Eigen::Index n_h = get_dim(in, path);
        if (n_x < 1 || n_h < 1)
            throw FormatError(path.string() + ": invalid layer shape in header");
        shapes.emplace_back(n_x, n_h);
    }

    lstm::LstmModel model;
    model.window_length = static_cast<int>(get_dim(in, path));
    const std::uint64_t flags = get_u64(in, path);
    if (flags > 1)
        throw FormatError(path.string() + ": unknown flag bits");
    model.has_output_layer = flags & 1;
    const Eigen::Index output_size = get_dim(in, path);

    for (const auto& [n_x, n_h] : shapes) {
        lstm::LstmLayerParams layer;
        layer.w_f = get_matrix(in, path, n_h, n_h + n_x);
        layer.w_i = get_matrix(in, path, n_h, n_h + n_x);
        layer.w_c = get_matrix(in, path, n_h, n_h + n_x);
        layer.w_o = get_matrix(in, path, n_h, n_h + n_x);
        layer.b_f = get_vector(in, path, n_h);
        layer.b_i = get_vector(in, path, n_h);
        layer.b_c = get_vector(in, path, n_h);
        layer.b_o = get_vector(in, path, n_h);
        model.layers.push_back(std::move(layer));
    }
    if (model.has_output_layer) {
        model.output_weight = get_matrix(in, path, output_size, shapes.back().second);
        model.output_bias = get_vector(in, path, output_size);
    }
    const Eigen::Index input_size = shapes.front().first;
    model.normalization.input_shift = get_vector(in, path, input_size);
    model.normalization.input_scale = get_vector(in, path, input_size);
    model.normalization.target_shift = get_vector(in, path, output_size);
    model.normalization.target_scale = get_vector(in, path, output_size);
    check_consumed(in, path);

    try {
        model.validate();
    } catch (const Error& err) {
        throw FormatError(path.string() + ": " + err.what());
    }
    return model;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    if (manifest.reduced_dim < 1 || manifest.param_dim < 1 || manifest.window_length < 1)
        throw ArgumentError("save_manifest: dimensions must be >= 1");
    const Eigen::Index n_in = manifest.reduced_dim + manifest.param_dim;
    if (manifest.normalization.input_shift.size() != n_in ||
        manifest.normalization.input_scale.size() != n_in ||
        manifest.normalization.target_shift.size() != manifest.reduced_dim ||
        manifest.normalization.target_scale.size() != manifest.reduced_dim)
        throw ArgumentError("save_manifest: normalization sizes inconsistent with dims");

    auto out = open_output(path);
    out.write(kManifestMagic, 8);
    put_u64(out, kFormatVersion);
    put_u64(out, static_cast<std::uint64_t>(manifest.train_ids.size()));
    put_u64(out, static_cast<std::uint64_t>(manifest.validation_ids.size()));
    put_u64(out, static_cast<std::uint64_t>(manifest.test_ids.size()));
    put_u64(out, static_cast<std::uint64_t>(manifest.reduced_dim));
    put_u64(out, static_cast<std::uint64_t>(manifest.param_dim));
    put_u64(out, static_cast<std::uint64_t>(manifest.window_length));
    for (const auto* ids : {&manifest.train_ids, &manifest.validation_ids, &manifest.test_ids})
        for (int id : *ids) put_u64(out, static_cast<std::uint64_t>(id));
    put_matrix(out, manifest.normalization.input_shift);
    put_matrix(out, manifest.normalization.input_scale);
    put_matrix(out, manifest.normalization.target_shift);
    put_matrix(out, manifest.normalization.target_scale);
    check_written(out, path);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    auto in = open_input(path);
    check_magic(in, kManifestMagic, path);
    const Eigen::Index n_train = get_dim(in, path);
    const Eigen::Index n_val = get_dim(in, path);
    const Eigen::Index n_test = get_dim(in, path);
    DatasetManifest manifest;
    manifest.reduced_dim = static_cast<int>(get_dim(in, path));
    manifest.param_dim = static_cast<int>(get_dim(in, path));
    manifest.window_length = static_cast<int>(get_dim(in, path));
    if (manifest.reduced_dim < 1 || manifest.param_dim < 1 || manifest.window_length < 1)
        throw FormatError(path.string() + ": invalid dimensions in header");

    auto read_ids = [&](Eigen::Index count, std::vector<int>& ids) {
        ids.reserve(static_cast<std::size_t>(count));
        for (Eigen::Index i = 0; i < count; ++i)
            ids.push_back(static_cast<int>(get_dim(in, path)));
    };
    read_ids(n_train, manifest.train_ids);
    read_ids(n_val, manifest.validation_ids);
    read_ids(n_test, manifest.test_ids);

    const Eigen::Index n_in = manifest.reduced_dim + manifest.param_dim;
    manifest.normalization.input_shift = get_vector(in, path, n_in);
    manifest.normalization.input_scale = get_vector(in, path, n_in);
    manifest.normalization.target_shift = get_vector(in, path, manifest.reduced_dim);
    manifest.normalization.target_scale = get_vector(in, path, manifest.reduced_dim);
    check_consumed(in, path);
    return manifest;
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::ofstream open_text_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<lstm::EpochStats>& history) {
    auto out = open_text_output(path);
    out << "epoch,train_loss,validation_loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << (i + 1) << ',' << format_double(history[i].train_loss) << ','
            << format_double(history[i].validation_loss) << '\n';
    check_written(out, path);
}

void write_scores_csv(const std::filesystem::path& path, const metrics::ScoreTriplet& triplet) {
    const auto& grid = triplet.reconstruction.grid;
    auto out = open_text_output(path);
    out << "t,s_rec,s_regr,s_approx\n";
    for (int i = 0; i < grid.eta; ++i)
        out << format_double(grid.time(i)) << ','
            << format_double(triplet.reconstruction.values(i)) << ','
            << format_double(triplet.regression.values(i)) << ','
            << format_double(triplet.approximation.values(i)) << '\n';
    check_written(out, path);
}

void write_rollout_csv(const std::filesystem::path& path, const TimeGrid& grid,
                       const Eigen::MatrixXd& reduced) {
    if (reduced.cols() != grid.eta)
        throw ArgumentError("write_rollout_csv: column count does not match grid");
    auto out = open_text_output(path);
    out << 't';
    for (Eigen::Index l = 0; l < reduced.rows(); ++l) out << ",zbar_" << (l + 1);
    out << '\n';
    for (int i = 0; i < grid.eta; ++i) {
        out << format_double(grid.time(i));
        for (Eigen::Index l = 0; l < reduced.rows(); ++l)
            out << ',' << format_double(reduced(l, i));
        out << '\n';
    }
    check_written(out, path);
}

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<metrics::SimulationReport>& rows) {
    auto out = open_text_output(path);
    out << "sim_id,s_regr,s_approx,s_approx_first_second,s_rec,e_dist_max,realtime_ratio,"
           "undefined_steps\n";
    auto put_row = [&out](const std::string& label, const metrics::SimulationReport& row) {
        out << label << ',' << format_double(row.s_regr_mean) << ','
            << format_double(row.s_approx_mean) << ','
            << format_double(row.s_approx_first_second) << ','
            << format_double(row.s_rec_mean) << ',' << format_double(row.e_dist_max) << ','
            << format_double(row.realtime_ratio) << ',' << row.undefined_steps << '\n';
    };
    for (const auto& row : rows) put_row(std::to_string(row.sim_id), row);

    if (rows.size() > 1) {
        metrics::SimulationReport mean;
        for (const auto& row : rows) {
            mean.s_rec_mean += row.s_rec_mean;
            mean.s_regr_mean += row.s_regr_mean;
            mean.s_approx_mean += row.s_approx_mean;
            mean.s_approx_first_second += row.s_approx_first_second;
            mean.e_dist_max += row.e_dist_max;
            mean.realtime_ratio += row.realtime_ratio;
            mean.undefined_steps += row.undefined_steps;
        }
        const double count = static_cast<double>(rows.size());
        mean.s_rec_mean /= count;
        mean.s_regr_mean /= count;
        mean.s_approx_mean /= count;
        mean.s_approx_first_second /= count;
        mean.e_dist_max /= count;
        mean.realtime_ratio /= count;
        put_row("mean", mean);
    }
    check_written(out, path);
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    auto out = open_text_output(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? ',' : '\n');
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ArgumentError("write_table_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? ',' : '\n');
    }
    check_written(out, path);
}

} // namespace podlstm::io
