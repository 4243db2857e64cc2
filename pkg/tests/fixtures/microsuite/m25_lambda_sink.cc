// entry: Each
// category: functions (conversion inside a lambda)
#include <napi.h>
#include <algorithm>

Napi::Value Each(const Napi::CallbackInfo& info) {
  Napi::Array items = info[0].As<Napi::Array>();  // sink: tainted
  double total = 0;
  std::vector<uint32_t> idx(items.Length());
  std::for_each(idx.begin(), idx.end(), [&](uint32_t i) {
    total += items.Get(i).As<Napi::Number>().DoubleValue();  // sink: tainted
  });
  return Napi::Number::New(info.Env(), total);
}
