// entry: Clamp
// category: different APIs (Nan::To<T>)
#include <nan.h>

NAN_METHOD(Clamp) {
  double value = Nan::To<double>(info[0]).FromJust();  // sink: tainted
  int32_t lo = Nan::To<int32_t>(info[1]).FromJust();  // sink: tainted
  int32_t hi = 100;
  if (value < lo) value = lo;
  if (value > hi) value = hi;
  info.GetReturnValue().Set(value);
}
