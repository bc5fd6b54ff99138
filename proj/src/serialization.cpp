#include "gesture_forge/serialization.hpp"

#include <cmath>
#include <fstream>

#include "gesture_forge/error.hpp"

namespace gesture_forge {

namespace {

const Json& field(const Json& j, const std::string& key) {
    require(j.is_object() && j.contains(key), ErrorKind::ParseError, "missing field '" + key + "'");
    return j.at(key);
}

template <typename T>
T get(const Json& j, const std::string& key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, "field '" + key + "': " + e.what());
    }
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& name, Eigen::Index size) {
    const Eigen::MatrixXd m = matrix_from_json(j, name);
    require(m.cols() == 1 && m.rows() == size, ErrorKind::ParseError,
            name + " must be a " + std::to_string(size) + "x1 matrix");
    return m.col(0);
}

void expect_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    require(m.rows() == rows && m.cols() == cols, ErrorKind::ParseError,
            name + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json data = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name) {
    require(j.is_object(), ErrorKind::ParseError, name + " is not a matrix object");
    const auto rows = get<long>(j, "rows");
    const auto cols = get<long>(j, "cols");
    const auto data = get<std::vector<double>>(j, "data");
    require(rows >= 0 && cols >= 0 && static_cast<long>(data.size()) == rows * cols, ErrorKind::ParseError,
            name + ": data length does not match rows x cols");
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            m(r, c) = data[r * cols + c];
            require(std::isfinite(m(r, c)), ErrorKind::ParseError, name + " holds a non-finite value");
        }
    return m;
}

Json gan_to_json(const GanModel& model) {
    const Generator& g = model.generator;
    return Json{
        {"kind", "gan"},
        {"frames", model.frames},
        {"dim", model.dim},
        {"hidden", model.hidden},
        {"scale", model.scale},
        {"mode", to_string(model.mode)},
        {"generator",
         {{"w_xh", matrix_to_json(g.w_xh)},
          {"w_hh", matrix_to_json(g.w_hh)},
          {"w_out", matrix_to_json(g.w_out)},
          {"b_h", matrix_to_json(g.b_h)},
          {"b_out", matrix_to_json(g.b_out)}}},
        {"discriminator", {{"w", matrix_to_json(model.discriminator.w)}, {"b", model.discriminator.b}}},
    };
}

GanModel gan_from_json(const Json& j) {
    require(get<std::string>(j, "kind") == "gan", ErrorKind::ParseError, "not a GAN document");
    GanModel m;
    m.frames = get<int>(j, "frames");
    m.dim = get<int>(j, "dim");
    m.hidden = get<int>(j, "hidden");
    m.scale = get<double>(j, "scale");
    require(m.frames >= 1 && m.dim >= 1 && m.hidden >= 1 && m.scale > 0.0, ErrorKind::ParseError,
            "GAN dimensions must be positive");
    try {
        m.mode = parse_data_mode(get<std::string>(j, "mode"));
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
    require(m.dim == mode_channels(m.mode).count, ErrorKind::ParseError, "GAN dim does not match its mode");
    const Json& g = field(j, "generator");
    m.generator.w_xh = matrix_from_json(field(g, "w_xh"), "w_xh");
    m.generator.w_hh = matrix_from_json(field(g, "w_hh"), "w_hh");
    m.generator.w_out = matrix_from_json(field(g, "w_out"), "w_out");
    expect_shape(m.generator.w_xh, m.hidden, m.dim, "w_xh");
    expect_shape(m.generator.w_hh, m.hidden, m.hidden, "w_hh");
    expect_shape(m.generator.w_out, m.dim, m.hidden, "w_out");
    m.generator.b_h = vector_from_json(field(g, "b_h"), "b_h", m.hidden);
    m.generator.b_out = vector_from_json(field(g, "b_out"), "b_out", m.dim);
    const Json& d = field(j, "discriminator");
    m.discriminator.w = vector_from_json(field(d, "w"), "discriminator w", static_cast<Eigen::Index>(m.frames) * m.dim);
    m.discriminator.b = get<double>(d, "b");
    return m;
}

Json predictor_to_json(const PredictorModel& model) {
    Json channels = Json::array();
    for (const ChannelModel& c : model.channels) {
        channels.push_back(Json{
            {"wz", matrix_to_json(c.cell.wz)},
            {"wr", matrix_to_json(c.cell.wr)},
            {"wh", matrix_to_json(c.cell.wh)},
            {"w_out", matrix_to_json(c.cell.w_out)},
            {"b_out", c.cell.b_out},
            {"offset", c.offset},
            {"scale", c.scale},
            {"fusion_center", c.fusion.center},
            {"fusion_half_range", c.fusion.half_range},
        });
    }
    return Json{{"kind", "predictor"},
                {"hidden", model.hidden()},
                {"w0", model.w0},
                {"channels", std::move(channels)}};
}

PredictorModel predictor_from_json(const Json& j) {
    require(get<std::string>(j, "kind") == "predictor", ErrorKind::ParseError, "not a predictor document");
    const int hidden = get<int>(j, "hidden");
    require(hidden >= 1, ErrorKind::ParseError, "hidden size must be >= 1");
    PredictorModel m;
    const auto w0 = get<std::vector<double>>(j, "w0");
    require(w0.size() == m.w0.size(), ErrorKind::ParseError, "w0 needs one weight per keypoint class");
    std::copy(w0.begin(), w0.end(), m.w0.begin());
    const Json& channels = field(j, "channels");
    require(channels.is_array() && channels.size() == kChannels, ErrorKind::ParseError,
            "predictor needs " + std::to_string(kChannels) + " channel models");
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const Json& c = channels[i];
        const std::string at = "channel " + std::to_string(i) + " ";
        ChannelModel cm;
        cm.cell.wz = matrix_from_json(field(c, "wz"), at + "wz");
        cm.cell.wr = matrix_from_json(field(c, "wr"), at + "wr");
        cm.cell.wh = matrix_from_json(field(c, "wh"), at + "wh");
        expect_shape(cm.cell.wz, hidden, hidden + 1, at + "wz");
        expect_shape(cm.cell.wr, hidden, hidden + 1, at + "wr");
        expect_shape(cm.cell.wh, hidden, hidden + 1, at + "wh");
        cm.cell.w_out = vector_from_json(field(c, "w_out"), at + "w_out", hidden);
        cm.cell.b_out = get<double>(c, "b_out");
        cm.offset = get<double>(c, "offset");
        cm.scale = get<double>(c, "scale");
        cm.fusion.center = get<double>(c, "fusion_center");
        cm.fusion.half_range = get<double>(c, "fusion_half_range");
        require(cm.scale > 0.0 && cm.fusion.half_range > 0.0, ErrorKind::ParseError, at + "has a non-positive scale");
        m.channels.push_back(std::move(cm));
    }
    return m;
}

Json match_result_to_json(const MatchResult& result) {
    auto optional = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    Json table = Json::array();
    for (const MatchRow& row : result.table)
        table.push_back(Json{{"gesture", row.gesture}, {"re_coord", optional(row.re_coord)},
                             {"re_angle", optional(row.re_angle)}});
    return Json{{"gesture", result.gesture},
                {"relative_error", result.relative_error},
                {"strategy", to_string(result.strategy)},
                {"cursor", result.cursor},
                {"table", std::move(table)}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::IoError, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    require(out.good(), ErrorKind::IoError, "cannot write " + path);
    out << j.dump(1) << '\n';
    require(out.good(), ErrorKind::IoError, "write to " + path + " failed");
}

}  // namespace gesture_forge
