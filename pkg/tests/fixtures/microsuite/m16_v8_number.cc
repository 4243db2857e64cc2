// entry: Square
// category: different APIs (legacy V8 conversions)
#include <node.h>

void Square(const v8::FunctionCallbackInfo<v8::Value>& args) {
  v8::Isolate* isolate = args.GetIsolate();
  double n = args[0]->NumberValue();  // sink: tainted
  args.GetReturnValue().Set(v8::Number::New(isolate, n * n));
}
