// entry: Reverse
// category: different APIs (node-addon-api)
#include <napi.h>

Napi::Value Reverse(const Napi::CallbackInfo& info) {
  Napi::Env env = info.Env();
  std::string s = info[0].As<Napi::String>().Utf8Value();  // sink: tainted
  std::string r(s.rbegin(), s.rend());
  return Napi::String::New(env, r);
}
