#include <gtest/gtest.h>

#include <sstream>

#include "bomm/io.hpp"

using namespace bomm;

TEST(Io, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) EXPECT_EQ(parse_double(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, ParseDoubleRejectsGarbage) {
    EXPECT_THROW(parse_double("abc"), InvalidDataError);
    EXPECT_THROW(parse_double("1.5x"), InvalidDataError);
    EXPECT_EQ(parse_double(" 2.25 \n"), 2.25);
}

TEST(Io, DatasetCsvRoundTrip) {
    MatrixXd X(3, 2);
    X << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    VectorXd y(3);
    y << -1.0, 2.0, 3.5;
    const Dataset d(DesignMatrix(X), y);
    std::stringstream ss;
    write_dataset_csv(ss, d);
    EXPECT_EQ(ss.str().substr(0, 9), "x1,x2,f\n0");
    const Dataset back = read_dataset_csv(ss);
    EXPECT_EQ(back.design().points(), X);
    EXPECT_EQ(back.responses(), y);
    EXPECT_EQ(back.shift(), d.shift());
}

TEST(Io, DesignCsvRoundTrip) {
    MatrixXd X(2, 3);
    X << 0.125, 0.25, 0.375, 0.5, 0.625, 0.75;
    std::stringstream ss;
    write_design_csv(ss, X);
    EXPECT_EQ(read_design_csv(ss), X);
}

TEST(Io, DomainJsonRoundTrip) {
    const Domain dom({-1.0, 0.0}, {1.0, 5.0});
    const Domain back = domain_from_json(domain_to_json(dom));
    EXPECT_EQ(back, dom);
    EXPECT_THROW(domain_from_json("{\"lower\": [0], \"upper\": [0]}"), DomainError);
}
