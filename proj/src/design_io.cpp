#include "csd/design_io.hpp"

#include "csd/errors.hpp"

#include <stdexcept>
#include <vector>

namespace csd {

namespace {

nlohmann::ordered_json flatten(const Matrix& m) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
    }
    return values;
}

Matrix unflatten(const nlohmann::ordered_json& values, int rows, int cols, const char* field) {
    if (!values.is_array() || values.size() != static_cast<std::size_t>(rows) * cols) {
        throw DimensionError(std::string("design json: ") + field + " must hold " +
                             std::to_string(rows * cols) + " numbers");
    }
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = values.at(i * cols + j).get<double>();
    }
    return m;
}

}  // namespace

nlohmann::ordered_json design_to_json(const MeasurementDesign& design) {
    nlohmann::ordered_json doc;
    doc["kind"] = std::string(to_string(design.kind));
    doc["strategy"] = std::string(to_string(design.strategy));
    doc["known_variance"] = design.known_variance;
    doc["M1"] = design.m1();
    doc["M2"] = design.m2();
    doc["N"] = design.n();
    doc["phi_s"] = flatten(design.phi_s);
    doc["phi_o"] = flatten(design.phi_o);
    return doc;
}

MeasurementDesign design_from_json(const nlohmann::ordered_json& doc) {
    MeasurementDesign d;
    d.kind = design_kind_from_string(doc.at("kind").get<std::string>());
    d.strategy = doc.contains("strategy")
                     ? strategy_from_string(doc.at("strategy").get<std::string>())
                     : Strategy::max_uncorrelated;
    const int m1 = doc.at("M1").get<int>();
    const int m2 = doc.at("M2").get<int>();
    const int n = doc.at("N").get<int>();
    if (m1 < 1 || m2 < 0 || n < 1) throw DimensionError("design json: invalid dimensions");
    d.known_variance = doc.value("known_variance", m2 == 0);
    d.phi_s = unflatten(doc.at("phi_s"), m1, n, "phi_s");
    d.phi_o = unflatten(doc.at("phi_o"), m2, n, "phi_o");
    return d;
}

std::string dump_design(const MeasurementDesign& design, int indent) {
    return design_to_json(design).dump(indent);
}

MeasurementDesign parse_design(std::string_view text) {
    return design_from_json(nlohmann::ordered_json::parse(text));
}

}  // namespace csd
