// entry: Xor
// category: different APIs (node-addon-api buffers)
#include <napi.h>

Napi::Value Xor(const Napi::CallbackInfo& info) {
  Napi::Buffer<uint8_t> buf = info[0].As<Napi::Buffer<uint8_t>>();  // sink: tainted
  uint8_t key = (uint8_t) info[1].ToNumber().Uint32Value();  // sink: tainted
  for (size_t i = 0; i < buf.Length(); i++) buf.Data()[i] ^= key;
  return info.Env().Undefined();
}
