#pragma once

// Literal data for 5070-1643978841 and 17016-1643962152 (first rows of the
// dump, the complete annotation and a cropped DOT export).

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

inline constexpr std::uint64_t k5070HeapStart = 94782313037824ull;  // 0x56343a198000
inline constexpr std::size_t k5070HeapBytes = 135169;

// xxd-style rows 0x00..0x78.
inline const std::vector<std::string> k5070Rows = {
    "0000000000000000", "5102000000000000", "0607070707070303", "0200000604010206",
    "0200000101000107", "0604010000000203", "0103010100000000", "0000000000000002",
    "0001000000000000", "0000010000000001", "80221a3a34560000", "007f1a3a34560000",
    "f0401a3a34560000", "90321a3a34560000", "608b1a3a34560000", "90471a3a34560000",
};

inline std::vector<std::uint8_t> rows_to_bytes(const std::vector<std::string>& rows) {
  std::vector<std::uint8_t> out;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); i += 2) out.push_back(static_cast<std::uint8_t>(std::stoul(r.substr(i, 2), nullptr, 16)));
  return out;
}

inline const char* k5070Json = R"({
    "SSH_PID": "5070",
    "SSH_STRUCT_ADDR": "56343a1a4800",
    "session_state_OFFSET": "0",
    "SESSION_STATE_ADDR": "56343a1a8d30",
    "newkeys_OFFSET": "344",
    "NEWKEYS_1_ADDR": "56343a1aaa40",
    "NEWKEYS_2_ADDR": "56343a1aab40",
    "enc_KEY_OFFSET": "0",
    "mac_KEY_OFFSET": "48",
    "name_ENCRYPTION_KEY_OFFSET": "0",
    "ENCRYPTION_KEY_1_NAME_ADDR": "56343a1a9db0",
    "ENCRYPTION_KEY_1_NAME": "aes128-gcm@openssh.com",
    "ENCRYPTION_KEY_2_NAME_ADDR": "56343a1a3fb0",
    "ENCRYPTION_KEY_2_NAME": "aes128-gcm@openssh.com",
    "key_ENCRYPTION_KEY_OFFSET": "32",
    "key_len_ENCRYPTION_KEY_OFFSET": "20",
    "iv_ENCRYPTION_KEY_OFFSET": "40",
    "iv_len_ENCRYPTION_KEY_OFFSET": "24",
    "KEY_A_ADDR": "56343a1a3170",
    "KEY_A_LEN": "12",
    "KEY_A_REAL_LEN": "12",
    "KEY_A": "feb5fd4ef0759b034d69b858",
    "KEY_B_ADDR": "56343a1a33e0",
    "KEY_B_LEN": "12",
    "KEY_B_REAL_LEN": "12",
    "KEY_B": "f50b988297fa19709445c4ee",
    "KEY_C_ADDR": "56343a1aa1b0",
    "KEY_C_LEN": "16",
    "KEY_C_REAL_LEN": "16",
    "KEY_C": "f5b53280e944db0fe196668d877cd4c0",
    "KEY_D_ADDR": "56343a1a4010",
    "KEY_D_LEN": "16",
    "KEY_D_REAL_LEN": "16",
    "KEY_D": "ac4f18a963d9e72c857497b7dc9d088d",
    "KEY_E_ADDR": "56343a1a7d90",
    "KEY_E_LEN": "0",
    "KEY_E_REAL_LEN": "0",
    "KEY_E": "",
    "KEY_F_ADDR": "56343a1a2f60",
    "KEY_F_LEN": "0",
    "KEY_F_REAL_LEN": "0",
    "KEY_F": "",
    "HEAP_START": "56343a198000"
})";

// Annotation with only two key values and no addresses (24375-1644243522 style).
inline const char* kPartialJson = R"({
    "SESSION_STATE_ADDR": "5589d41e8d30",
    "KEY_C": "689e549a80ce4be95d8b742e36a229bf",
    "KEY_D": "76788e66a56d2b61eec294df37422fcb",
    "HEAP_START": "5589d41e0000"
})";

inline const char* k17016Dot = R"dot(strict digraph "17016-1643962152" {
    "CHN(0x558343d21d40)" [label="CHN(1)" color="cyan" style=filled shape=square];
    "CHN(0x558343d1a448)" [label="CHN(2)" color="cyan" style=filled shape=square];
    "VN(0x558343d1a450)" [label="VN" color="grey" style=filled];
    "VN(0x558343d1a458)" [label="VN" color="grey" style=filled];
    "PN(0x558343d24ae8)" [label="PN" color="orange" style=filled shape=hexagon];
    "KN_KEY_A(0x558343d29460)" [label="KN(A)" color="green" style=filled];
    "KN_KEY_B(0x558343d2b960)" [label="KN(B)" color="green" style=filled];
    "CHN(0x558343d21d40)" -> "KN_KEY_A(0x558343d29460)" [label="dts" weight=1]
    "PN(0x558343d204e8)" -> "KN_KEY_A(0x558343d29460)" [label="ptr" weight=1]
    "CHN(0x558343d21d40)" -> "KN_KEY_B(0x558343d2b960)" [label="dts" weight=1]
    "PN(0x558343d2deb8)" -> "KN_KEY_B(0x558343d2b960)" [label="ptr" weight=1]
    "CHN(0x558343d21d40)" -> "KN_KEY_C(0x558343d29080)" [label="dts" weight=1]
    "PN(0x558343d204e0)" -> "KN_KEY_C(0x558343d29080)" [label="ptr" weight=1]
    "PN(0x558343d24ae8)" -> "VN(0x558343d1a010)" [label="ptr" weight=1]
    "PN(0x558343d1a240)" -> "VN(0x558343d20680)" [label="ptr" weight=1]
}
)dot";

}  // namespace fixtures
