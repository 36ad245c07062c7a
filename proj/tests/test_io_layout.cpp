#include <gtest/gtest.h>

#include "poet/io_layout.hpp"
#include "poet/synth.hpp"
#include "test_support.hpp"

using namespace poet;

namespace {

ExpectedSubmodule submodule(std::uint16_t slot, std::uint16_t subslot, std::uint16_t props,
                            std::vector<DataDescription> descriptions) {
    ExpectedSubmodule e;
    e.slot = slot;
    e.module_id = 0x100u + slot;
    e.subslot = subslot;
    e.submodule_id = 1;
    e.submodule_properties = props;
    e.data_descriptions = std::move(descriptions);
    return e;
}

IocrDescriptor cr(IoCrType type, std::uint16_t ref, std::uint16_t fid, std::uint16_t length) {
    IocrDescriptor d;
    d.type = type;
    d.reference = ref;
    d.frame_id = fid;
    d.data_length = length;
    return d;
}

// Head module without IO, a 2-byte input module and a 4-byte output module.
CmFrame three_submodule_connect() {
    CmFrame f;
    f.operation = CmOperation::Connect;
    f.direction = CmDirection::Request;
    f.iocr_blocks = {cr(IoCrType::Input, 1, 0x8000, 40), cr(IoCrType::Output, 2, 0x8001, 40)};
    f.expected_submodules = {
        submodule(0, 1, 0, {{DataDirection::Input, 0, 1, 1}}),
        submodule(1, 1, 1, {{DataDirection::Input, 2, 1, 1}}),
        submodule(2, 1, 2, {{DataDirection::Output, 4, 1, 1}}),
    };
    return f;
}

}  // namespace

TEST(IoLayout, DerivesOffsetsFromExpectedSubmodules) {
    IoLayout layout = layout_io(three_submodule_connect());
    ASSERT_EQ(layout.specs.size(), 2u);

    const IoDataSpec& in = layout.specs[0];
    EXPECT_EQ(in.direction, DataDirection::Input);
    EXPECT_EQ(in.slot, 1);
    EXPECT_EQ(in.frame_id, 0x8000);
    EXPECT_EQ(in.offset, 1);
    EXPECT_EQ(in.length, 2);
    EXPECT_EQ(in.iops_offset, 3);
    EXPECT_EQ(in.iocs_frame_id, 0x8001);
    EXPECT_EQ(in.iocs_offset, 6);
    EXPECT_EQ(in.format, ValueFormat::U16);

    const IoDataSpec& out = layout.specs[1];
    EXPECT_EQ(out.direction, DataDirection::Output);
    EXPECT_EQ(out.slot, 2);
    EXPECT_EQ(out.frame_id, 0x8001);
    EXPECT_EQ(out.offset, 0);
    EXPECT_EQ(out.iops_offset, 4);
    EXPECT_EQ(out.iocs_frame_id, 0x8000);
    EXPECT_EQ(out.iocs_offset, 4);
    EXPECT_EQ(out.format, ValueFormat::U32);

    ASSERT_EQ(layout.crs.size(), 2u);
    EXPECT_EQ(layout.crs[0].laid_out_length, 5);
    EXPECT_EQ(layout.crs[1].laid_out_length, 7);
    EXPECT_EQ(layout.crs[0].declared_length, 40);
}

TEST(IoLayout, ExplicitObjectsMustAgreeWithLayout) {
    CmFrame f = three_submodule_connect();
    f.iocr_blocks[0].data_objects = {{0, 0, 1, 0}, {0, 1, 1, 1}};
    f.iocr_blocks[0].iocs_entries = {{0, 2, 1, 4}};
    EXPECT_NO_THROW(layout_io(f));
    f.iocr_blocks[0].data_objects[1].frame_offset = 2;
    EXPECT_THROW(layout_io(f), InconsistentConnect);
}

TEST(IoLayout, ExactLengthIsAcceptedAndOtherLengthsRejected) {
    CmFrame f = three_submodule_connect();
    f.iocr_blocks[0].data_length = 5;
    EXPECT_NO_THROW(layout_io(f));
    f.iocr_blocks[0].data_length = 6;
    EXPECT_THROW(layout_io(f), InconsistentConnect);
}

TEST(IoLayout, UnknownSubmoduleReferenceIsInconsistent) {
    CmFrame f = three_submodule_connect();
    f.iocr_blocks[0].data_objects = {{0, 9, 1, 0}};
    EXPECT_THROW(layout_io(f), InconsistentConnect);
}

TEST(IoLayout, RequiresConnectRequest) {
    CmFrame f = three_submodule_connect();
    f.direction = CmDirection::Response;
    EXPECT_THROW(layout_io(f), std::invalid_argument);
    f.direction = CmDirection::Request;
    f.operation = CmOperation::Write;
    EXPECT_THROW(layout_io(f), std::invalid_argument);
}

TEST(IoLayout, ConnectResponseRebindsFrameIds) {
    auto specs = extract_io_specs(three_submodule_connect());
    CmFrame res;
    res.operation = CmOperation::Connect;
    res.direction = CmDirection::Response;
    res.iocr_responses = {{IoCrType::Input, 1, 0x8010}, {IoCrType::Output, 2, 0x8011}};
    apply_frame_ids(specs, res);
    EXPECT_EQ(specs[0].frame_id, 0x8010);
    EXPECT_EQ(specs[0].iocs_frame_id, 0x8011);
    EXPECT_EQ(specs[1].frame_id, 0x8011);
    EXPECT_EQ(specs[1].iocs_frame_id, 0x8010);
}

TEST(IoLayout, ExtractsSlicesAndEvaluatesProviderStatus) {
    auto specs = extract_io_specs(three_submodule_connect());
    PnioCyclicFrame f;
    f.frame_id = 0x8000;
    f.data.assign(40, 0);
    f.data[0] = 0x80;  // head module IOPS
    f.data[1] = 0x12;
    f.data[2] = 0x34;
    f.data[3] = 0x80;
    std::vector<IoDataSpec> input{specs[0]};
    auto slices = extract_process_data(f, input);
    ASSERT_EQ(slices.size(), 1u);
    EXPECT_EQ(slices[0].second, (std::vector<std::uint8_t>{0x12, 0x34}));
    EXPECT_EQ(decode_value(slices[0].first, slices[0].second), 0x1234u);
    EXPECT_EQ(evaluate_iops(f, specs), IopsSummary::Good);

    f.data[3] = 0x00;
    EXPECT_EQ(evaluate_iops(f, specs), IopsSummary::Bad);
    f.frame_id = 0x8005;
    EXPECT_EQ(evaluate_iops(f, specs), IopsSummary::Unknown);
}

TEST(IoLayout, ShortFrameRaisesSpecOutOfRange) {
    auto specs = extract_io_specs(three_submodule_connect());
    PnioCyclicFrame f;
    f.frame_id = 0x8001;
    f.data.assign(3, 0);
    try {
        extract_process_data(f, {specs[1]});
        FAIL();
    } catch (const SpecOutOfRange& e) {
        EXPECT_EQ(e.spec().slot, 2);
    }
}

TEST(IoLayout, DecodeValueHonoursFormatAndByteOrder) {
    IoDataSpec s;
    s.format = ValueFormat::U16;
    std::vector<std::uint8_t> b{0x01, 0x02};
    EXPECT_EQ(decode_value(s, b), 0x0102u);
    s.big_endian = false;
    EXPECT_EQ(decode_value(s, b), 0x0201u);
    s.format = ValueFormat::Octets;
    EXPECT_FALSE(decode_value(s, b));
}

TEST(IoLayoutProperty, ConservationHoldsOnEverySynthConnect) {
    std::size_t connects = 0;
    for (const auto& name : builtin_scenario_names()) {
        for (const auto& f : synthesize(builtin_scenario(name)).frames) {
            if (!f.body) continue;
            const auto* cm = std::get_if<CmFrame>(&*f.body);
            if (!cm || cm->operation != CmOperation::Connect || cm->direction != CmDirection::Request) continue;
            ++connects;
            IoLayout layout = layout_io(*cm);
            for (std::size_t i = 0; i < cm->iocr_blocks.size(); ++i) {
                const auto& block = cm->iocr_blocks[i];
                std::uint32_t sum = 0;
                DataDirection own = block.type == IoCrType::Input ? DataDirection::Input : DataDirection::Output;
                for (const auto& sm : cm->expected_submodules)
                    for (const auto& d : sm.data_descriptions)
                        sum += d.direction == own ? d.data_length + d.iops_length : d.iocs_length;
                EXPECT_EQ(sum, block.data_length) << name;
                EXPECT_EQ(layout.crs[i].laid_out_length, sum) << name;
            }
        }
    }
    EXPECT_GT(connects, 10u);
}
