#include "tenseg/io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace tenseg;

TEST(Tsr1, RoundTripIsBitExact) {
    const DenseTensor t = tenseg::testing::random_tensor({3, 1, 4, 2}, 1);
    std::stringstream ss;
    write_tsr1(ss, t);
    EXPECT_EQ(ss.str().size(), 4 + 4 + 4 * 8 + t.size() * 8);
    EXPECT_EQ(read_tsr1(ss), t);
}

TEST(Tsr1, HeaderLayout) {
    std::stringstream ss;
    write_tsr1(ss, DenseTensor(Shape{2, 3}, {1, 2, 3, 4, 5, 6}));
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "TSR1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
    EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 3);
    double first = 0.0;
    std::memcpy(&first, bytes.data() + 24, 8);
    EXPECT_EQ(first, 1.0);
}

TEST(Tsr1, RejectsCorruptInput) {
    std::stringstream bad("TSR2xxxxxxxx");
    EXPECT_THROW((void)read_tsr1(bad), IoError);

    std::stringstream ss;
    write_tsr1(ss, DenseTensor(Shape{2, 2}, {1, 2, 3, 4}));
    std::string bytes = ss.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    EXPECT_THROW((void)read_tsr1(truncated), IoError);

    std::string zero = bytes;
    std::fill(zero.begin() + 8, zero.begin() + 16, '\0');
    std::stringstream zs(zero);
    EXPECT_THROW((void)read_tsr1(zs), IoError);

    EXPECT_THROW((void)read_tsr1(std::filesystem::path("/nonexistent/x.tsr")), IoError);
}

TEST(Csv, MatrixRoundTripWithHeader) {
    Matrix m(2, 3);
    m << 1.5, -2, 1e-300, 0.1, 3, 7;
    std::stringstream ss;
    write_csv_matrix(ss, m, "a,b,c");
    EXPECT_EQ(read_csv_matrix(ss), m);
}

TEST(Csv, RejectsRaggedAndNonNumeric) {
    std::stringstream ragged("1,2\n3\n");
    EXPECT_THROW((void)read_csv_matrix(ragged), IoError);
    std::stringstream text("1,2\n3,x\n");
    EXPECT_THROW((void)read_csv_matrix(text), IoError);
    std::stringstream empty("x,y\n");
    EXPECT_THROW((void)read_csv_matrix(empty), IoError);
    std::stringstream crlf("1, 2\r\n3,4\r\n");
    const Matrix m = read_csv_matrix(crlf);
    EXPECT_EQ(m(1, 1), 4.0);
}

TEST(Csv, TruthRoundTrip) {
    std::stringstream ss;
    write_truth_csv(ss, {100, 150, 200});
    EXPECT_EQ(ss.str(), "change_point\n100\n150\n200\n");
    EXPECT_EQ(read_truth_csv(ss), (std::vector<std::size_t>{100, 150, 200}));

    std::stringstream empty;
    write_truth_csv(empty, {});
    EXPECT_EQ(empty.str(), "change_point\n");
    EXPECT_TRUE(read_truth_csv(empty).empty());

    std::stringstream bad("change_point\n1.5\n");
    EXPECT_THROW((void)read_truth_csv(bad), IoError);
}
