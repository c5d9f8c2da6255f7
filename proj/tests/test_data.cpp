#include "diproperm/data.hpp"
#include "diproperm/error.hpp"
#include "diproperm/rng.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <set>

using namespace diproperm;

TEST(SamplePair, RejectsEmptyGroups) {
    EXPECT_THROW(SamplePair(Matrix(0, 2), Matrix::Zero(1, 2)), EmptyGroupError);
    EXPECT_THROW(SamplePair(Matrix::Zero(1, 2), Matrix(0, 2)), EmptyGroupError);
}

TEST(SamplePair, RejectsMismatchedAndNonFinite) {
    EXPECT_THROW(SamplePair(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), InvalidArgument);
    EXPECT_THROW(SamplePair(Matrix(2, 0), Matrix(2, 0)), InvalidArgument);
    Matrix x = Matrix::Zero(2, 2);
    x(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(SamplePair(x, Matrix::Zero(1, 2)), InvalidArgument);
    x(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(SamplePair(x, Matrix::Zero(1, 2)), InvalidArgument);
}

TEST(Pool, ConcatenatesXThenY) {
    Matrix x(2, 2), y(1, 2);
    x << 1, 2, 3, 4;
    y << 5, 6;
    const PooledSample p = pool(SamplePair(x, y));
    EXPECT_EQ(p.total(), 3);
    EXPECT_EQ(p.split_m, 2);
    EXPECT_EQ(p.z_rows.row(0), x.row(0));
    EXPECT_EQ(p.z_rows.row(2), y.row(0));
}

TEST(Pool, TwoSingletons) {
    const PooledSample p = pool(SamplePair(Matrix::Ones(1, 3), Matrix::Zero(1, 3)));
    EXPECT_EQ(p.total(), 2);
    EXPECT_EQ(p.split_m, 1);
}

TEST(Pool, UnpoolRoundTripIsExact) {
    const SamplePair sp = fixtures::gaussian_pair(4, 7, 5, 11);
    const SamplePair back = unpool(pool(sp));
    EXPECT_EQ(back.x(), sp.x());
    EXPECT_EQ(back.y(), sp.y());
    EXPECT_EQ(back.label_x(), sp.label_x());
}

TEST(Parse, ThreeRowCsv) {
    const SamplePair sp = parse_dataset("label,a,b\nA,1,2\nA,3,4\nB,5,6\n");
    EXPECT_EQ(sp.m(), 2);
    EXPECT_EQ(sp.n(), 1);
    EXPECT_EQ(sp.d(), 2);
    EXPECT_EQ(sp.label_x(), "A");
    EXPECT_EQ(sp.label_y(), "B");
    EXPECT_DOUBLE_EQ(sp.x()(1, 0), 3);
    EXPECT_DOUBLE_EQ(sp.y()(0, 1), 6);
}

TEST(Parse, HeaderlessIsDetected) {
    const SamplePair sp = parse_dataset("A,1,2\nB,3,4\n");
    EXPECT_EQ(sp.m(), 1);
    EXPECT_EQ(sp.n(), 1);
}

TEST(Parse, TransposeSwapsRoles) {
    // genes x samples: first row holds labels, later rows one gene each.
    const std::string wide = "label,A,A,B\ng1,1,3,5\ng2,2,4,6\n";
    const SamplePair t = parse_dataset(wide, LoadOptions{.transpose = true});
    const SamplePair direct = parse_dataset("label,g1,g2\nA,1,2\nA,3,4\nB,5,6\n");
    EXPECT_EQ(t.m(), 2);
    EXPECT_EQ(t.d(), 2);
    EXPECT_EQ(t.x(), direct.x());
    EXPECT_EQ(t.y(), direct.y());
}

TEST(Parse, ThreeLabelsRejected) {
    EXPECT_THROW(parse_dataset("A,1\nB,2\nC,3\n"), LabelError);
    EXPECT_THROW(parse_dataset("A,1\nA,2\n"), LabelError);
}

TEST(Parse, NonNumericCellReportsPosition) {
    try {
        parse_dataset("g,a,b\nA,1,2\nB,3,x\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_EQ(e.column(), 3u);
    }
    EXPECT_THROW(parse_dataset("g,a,b\nA,1,\nB,3,4\n"), ParseError);
    EXPECT_THROW(parse_dataset("g,a,b\nA,1,nan\nB,3,4\n"), ParseError);
}

TEST(Parse, RaggedRowRejected) { EXPECT_THROW(parse_dataset("A,1,2\nB,3\n"), ParseError); }

TEST(Parse, TabDelimitedAndNamedLabel) {
    const SamplePair sp = parse_dataset("x1\tcls\tx2\n1\tb\t2\n3\ta\t4\n", LoadOptions{.labels = LabelColumnName{"cls"}});
    EXPECT_EQ(sp.label_x(), "a");
    EXPECT_DOUBLE_EQ(sp.x()(0, 0), 3);
    EXPECT_DOUBLE_EQ(sp.x()(0, 1), 4);
}

TEST(Parse, PositiveLabelOverridesOrder) {
    const SamplePair sp = parse_dataset("A,1\nB,2\nB,3\n", LoadOptions{.positive_label = "B"});
    EXPECT_EQ(sp.label_x(), "B");
    EXPECT_EQ(sp.m(), 2);
    EXPECT_THROW(parse_dataset("A,1\nB,2\n", LoadOptions{.positive_label = "Z"}), LabelError);
}

TEST(Parse, IdColumnIgnored) {
    const SamplePair sp = parse_dataset("id,g,v\ns1,A,1\ns2,B,2\n", LoadOptions{.labels = LabelColumnIndex{1}, .id_column = 0});
    EXPECT_EQ(sp.d(), 1);
    EXPECT_DOUBLE_EQ(sp.y()(0, 0), 2);
}

TEST(Parse, LabelFile) {
    const std::string path = ::testing::TempDir() + "labels.txt";
    {
        std::ofstream f(path);
        f << "u\nv\nu\n";
    }
    const SamplePair sp = parse_dataset("1,2\n3,4\n5,6\n", LoadOptions{.labels = LabelFile{path}});
    EXPECT_EQ(sp.m(), 2);
    EXPECT_EQ(sp.d(), 2);
    EXPECT_DOUBLE_EQ(sp.x()(1, 0), 5);
    EXPECT_THROW(parse_dataset("1,2\n3,4\n", LoadOptions{.labels = LabelFile{path}}), LabelError);
    std::remove(path.c_str());
}

TEST(Parse, OrderStableWithinGroups) {
    const SamplePair a = parse_dataset("A,1\nB,10\nA,2\nB,20\nA,3\n");
    const SamplePair b = parse_dataset("A,3\nB,20\nA,1\nA,2\nB,10\n");
    EXPECT_EQ(a.x().col(0).transpose(), (Vector(3) << 1, 2, 3).finished().transpose());
    EXPECT_EQ(b.x().col(0).transpose(), (Vector(3) << 3, 1, 2).finished().transpose());
    EXPECT_EQ(b.y().col(0).transpose(), (Vector(2) << 20, 10).finished().transpose());
}

TEST(Csv, RoundTripThroughText) {
    const SamplePair sp = fixtures::gaussian_pair(3, 4, 6, 5);
    const SamplePair back = parse_dataset(to_csv(sp));
    EXPECT_EQ(back.x(), sp.x());
    EXPECT_EQ(back.y(), sp.y());
    const SamplePair again = unpool(pool(back));
    EXPECT_EQ(again.x(), sp.x());
}

TEST(Load, MissingFileIsInvalidArgument) { EXPECT_THROW(load_dataset("/nonexistent/file.csv"), InvalidArgument); }

TEST(Rng, StreamsDependOnlyOnSeedAndIndex) {
    const RngPolicy a(42), b(42);
    Engine s1 = a.stream(7), s2 = b.stream(7), s3 = a.stream(8);
    const auto v1 = s1(), v2 = s2(), v3 = s3();
    EXPECT_EQ(v1, v2);
    EXPECT_NE(v1, v3);
    Engine c1 = a.derive(3).stream(0), c2 = a.derive(3).stream(0), c3 = a.derive(4).stream(0);
    EXPECT_EQ(c1(), c2());
    EXPECT_NE(a.derive(3).stream(0)(), c3());
}

TEST(Rng, UniformIndexInRange) {
    Engine e(1);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = uniform_index(e, 7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, PermutationIsBijection) {
    Engine e(9);
    const auto p = draw_permutation(50, e);
    std::set<std::size_t> seen(p.begin(), p.end());
    EXPECT_EQ(seen.size(), 50u);
    EXPECT_EQ(*seen.rbegin(), 49u);
}
